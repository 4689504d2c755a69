// acceptance suite lands after the library is complete
