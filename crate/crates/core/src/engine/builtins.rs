use super::{Alphabet, EngineError, State};

/// Named programmatic rules over dense alphabets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builtin {
    /// Every cell keeps its state.
    Identity,
    /// Each cell takes its right neighbor's state (contents move left).
    ShiftLeft,
    /// Radius-1 maximum over a two-state alphabet.
    Max,
    /// Elementary CA by Wolfram number.
    Eca(u8),
    /// Wrapper adding a spreading state on top of an inner behavior: any cell
    /// seeing the spreading state becomes it, others behave as the inner rule.
    /// The spreading state is the last symbol of the alphabet; the inner
    /// behavior here is the identity (arbitrary bases are built via
    /// [`spreading_over`]).
    Spreading { state: State },
}

impl Builtin {
    /// Parse a builtin name: `identity`, `shift-left`, `max`, `eca-<n>`,
    /// `spreading-<state>`, or `two-phase` (handled by the caller since it
    /// needs no alphabet).
    pub fn parse(name: &str, alphabet: &Alphabet) -> Result<Builtin, EngineError> {
        if name == "identity" {
            return Ok(Builtin::Identity);
        }
        if name == "shift-left" {
            return Ok(Builtin::ShiftLeft);
        }
        if name == "max" {
            return Ok(Builtin::Max);
        }
        if let Some(num) = name.strip_prefix("eca-") {
            let n: u8 = num
                .parse()
                .map_err(|_| EngineError::UnknownSymbol(name.to_string()))?;
            return Ok(Builtin::Eca(n));
        }
        if let Some(sym) = name.strip_prefix("spreading-") {
            let state = alphabet
                .index_of(sym)
                .ok_or_else(|| EngineError::UnknownSymbol(sym.to_string()))?;
            return Ok(Builtin::Spreading { state });
        }
        Err(EngineError::UnknownSymbol(name.to_string()))
    }

    pub fn radius(&self) -> u32 {
        1
    }

    pub(super) fn check_alphabet(&self, alphabet: &Alphabet) -> Result<(), EngineError> {
        match self {
            Builtin::Max | Builtin::Eca(_) if alphabet.len() != 2 => Err(EngineError::BadAlphabet),
            Builtin::Spreading { state } if *state >= alphabet.len() as u64 => {
                Err(EngineError::StateOutOfRange { state: *state, size: alphabet.len() as u64 })
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, neigh: &[State]) -> State {
        match self {
            Builtin::Identity => neigh[neigh.len() / 2],
            Builtin::ShiftLeft => neigh[neigh.len() / 2 + 1],
            Builtin::Max => *neigh.iter().max().unwrap(),
            Builtin::Eca(n) => {
                let pat = ((neigh[0] & 1) << 2) | ((neigh[1] & 1) << 1) | (neigh[2] & 1);
                ((n >> pat) & 1) as State
            }
            Builtin::Spreading { state } => {
                if neigh.contains(state) {
                    *state
                } else {
                    neigh[neigh.len() / 2]
                }
            }
        }
    }
}

/// A spreading state grafted onto an arbitrary base rule.
///
/// The wrapped alphabet is the base alphabet plus one fresh symbol. A cell
/// seeing the spreading symbol anywhere in its neighborhood becomes it;
/// otherwise the base rule applies.
pub fn spreading_over(
    base: &super::LocalRule,
    spread_name: &str,
) -> Result<super::LocalRule, EngineError> {
    let mut names: Vec<String> = base.alphabet().names().to_vec();
    if names.iter().any(|n| n == spread_name) {
        return Err(EngineError::BadAlphabet);
    }
    names.push(spread_name.to_string());
    let alphabet = Alphabet::new(names)?;
    let spread = (alphabet.len() - 1) as State;
    let q = alphabet.len() as u64;
    let r = base.radius();
    let span = (2 * r + 1) as usize;
    let required = (q as u128).pow(span as u32);
    if required > (1 << 24) {
        return Err(EngineError::BudgetExceeded { required, budget: 1 << 24 });
    }
    let mut table = vec![0u64; required as usize];
    let mut neigh = vec![0u64; span];
    for (idx, slot) in table.iter_mut().enumerate() {
        let mut rem = idx as u64;
        for k in (0..span).rev() {
            neigh[k] = rem % q;
            rem /= q;
        }
        *slot = if neigh.contains(&spread) {
            spread
        } else {
            base.apply(&neigh)
        };
    }
    super::LocalRule::from_table(alphabet, r, table)
}
