fn main() {
    println!("placeholder until the CLI lands");
}
