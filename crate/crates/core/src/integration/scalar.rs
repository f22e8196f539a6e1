use num::{FromPrimitive, Num};

/// Field elements the combinatorial integrators run over: `f64` for speed,
/// `BigRational` for exact golden values.
pub trait Scalar: Num + Clone + FromPrimitive + PartialOrd + std::fmt::Debug {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("every count is representable")
    }

    /// `n!` accumulated in the field itself.
    fn factorial(n: u32) -> Self {
        (1..=n as u64).fold(Self::one(), |acc, k| acc * Self::from_count(k))
    }

    fn powu(&self, exp: u32) -> Self {
        num::pow(self.clone(), exp as usize)
    }
}

impl<T: Num + Clone + FromPrimitive + PartialOrd + std::fmt::Debug> Scalar for T {}
