//! The builtin table shared by typing, lowering and the VM.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Normal,
    Bernoulli,
    Poisson,
    UniformDiscrete,
    UniformContinuous,
    Beta,
    Exponential,
    SampleStar,
    DistScore,
    DistVar,
    DistMean,
    SampleImpl,
    FactorImpl,
    Importance,
    Mcmc,
    Enumerate,
    Map,
    Repeat,
    Reduce,
    Filter,
    Length,
    Push,
    Concat,
    ToReal,
    Floor,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
}

impl Builtin {
    pub const ALL: [Builtin; 30] = [
        Builtin::Normal,
        Builtin::Bernoulli,
        Builtin::Poisson,
        Builtin::UniformDiscrete,
        Builtin::UniformContinuous,
        Builtin::Beta,
        Builtin::Exponential,
        Builtin::SampleStar,
        Builtin::DistScore,
        Builtin::DistVar,
        Builtin::DistMean,
        Builtin::SampleImpl,
        Builtin::FactorImpl,
        Builtin::Importance,
        Builtin::Mcmc,
        Builtin::Enumerate,
        Builtin::Map,
        Builtin::Repeat,
        Builtin::Reduce,
        Builtin::Filter,
        Builtin::Length,
        Builtin::Push,
        Builtin::Concat,
        Builtin::ToReal,
        Builtin::Floor,
        Builtin::Exp,
        Builtin::Log,
        Builtin::Sqrt,
        Builtin::Abs,
        Builtin::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Normal => "normal",
            Builtin::Bernoulli => "bernoulli",
            Builtin::Poisson => "poisson",
            Builtin::UniformDiscrete => "uniform-discrete",
            Builtin::UniformContinuous => "uniform-continuous",
            Builtin::Beta => "beta",
            Builtin::Exponential => "exponential",
            Builtin::SampleStar => "sample*",
            Builtin::DistScore => "dist-score",
            Builtin::DistVar => "dist-var",
            Builtin::DistMean => "dist-mean",
            Builtin::SampleImpl => "sample-impl",
            Builtin::FactorImpl => "factor-impl",
            Builtin::Importance => "importance",
            Builtin::Mcmc => "mcmc",
            Builtin::Enumerate => "enumerate",
            Builtin::Map => "map",
            Builtin::Repeat => "repeat",
            Builtin::Reduce => "reduce",
            Builtin::Filter => "filter",
            Builtin::Length => "length",
            Builtin::Push => "push",
            Builtin::Concat => "concat",
            Builtin::ToReal => "to-real",
            Builtin::Floor => "floor",
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::Pow => "pow",
        }
    }

    /// Number of surface arguments.
    pub fn arity(self) -> usize {
        match self {
            Builtin::Normal
            | Builtin::UniformDiscrete
            | Builtin::UniformContinuous
            | Builtin::Beta
            | Builtin::DistScore
            | Builtin::SampleImpl
            | Builtin::FactorImpl
            | Builtin::Importance
            | Builtin::Mcmc
            | Builtin::Enumerate
            | Builtin::Map
            | Builtin::Repeat
            | Builtin::Filter
            | Builtin::Push
            | Builtin::Concat
            | Builtin::Pow => 2,
            Builtin::Reduce => 3,
            _ => 1,
        }
    }

    /// Builtins lowered to inline loops rather than a `CallBuiltin`.
    pub fn is_inline_loop(self) -> bool {
        matches!(
            self,
            Builtin::Map | Builtin::Repeat | Builtin::Reduce | Builtin::Filter
        )
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn id(self) -> u16 {
        Builtin::ALL.iter().position(|b| *b == self).unwrap() as u16
    }

    pub fn from_id(id: u16) -> Option<Builtin> {
        Builtin::ALL.get(id as usize).copied()
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_roundtrip() {
        for b in Builtin::ALL {
            assert_eq!(Builtin::from_id(b.id()), Some(b));
            assert_eq!(Builtin::from_name(b.name()), Some(b));
        }
    }
}
