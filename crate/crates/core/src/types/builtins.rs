use crate::builtins::Builtin;

use super::{Type, TypeScheme, VarFlags};

/// Scheme of a builtin, with quantified variables numbered from 0 and the
/// flags each variable carries.
pub fn builtin_scheme(b: Builtin) -> (TypeScheme, Vec<(u32, VarFlags)>) {
    let v = Type::Var;
    // `g` is the call's answer type; pure builtins leave it untouched.
    let g = || v(0);
    let pure = |params: Vec<Type>, ret: Type| Type::fun(Type::params(params), g(), ret, g());
    let mut flags = Vec::new();
    let ty = match b {
        Builtin::Normal | Builtin::UniformContinuous | Builtin::Beta => {
            pure(vec![Type::REAL, Type::REAL], Type::dist(Type::REAL))
        }
        Builtin::Bernoulli => pure(vec![Type::REAL], Type::dist(Type::BOOL)),
        Builtin::Poisson => pure(vec![Type::REAL], Type::dist(Type::INT)),
        Builtin::Exponential => pure(vec![Type::REAL], Type::dist(Type::REAL)),
        Builtin::UniformDiscrete => pure(vec![Type::INT, Type::INT], Type::dist(Type::INT)),
        Builtin::SampleStar => pure(vec![Type::dist(v(1))], v(1)),
        Builtin::DistScore => pure(vec![Type::dist(v(1)), v(1)], Type::REAL),
        Builtin::DistVar | Builtin::DistMean => pure(vec![Type::dist(v(1))], Type::REAL),
        Builtin::SampleImpl => {
            // (~a, a/t -> b/t) -> (a/t -> b/t, a)
            let k = Type::fun(v(1), v(3), v(2), v(3));
            pure(vec![Type::dist(v(1)), k.clone()], Type::Tuple(vec![k, v(1)]))
        }
        Builtin::FactorImpl => {
            // (real, unit/t -> b/t) -> unit/t -> b/t
            let k = Type::fun(Type::UNIT, v(3), v(2), v(3));
            pure(vec![Type::REAL, k.clone()], k)
        }
        Builtin::Importance | Builtin::Mcmc | Builtin::Enumerate => {
            // (unit/a -> a/b, int) -> ~b
            let model = Type::fun(Type::UNIT, v(1), v(1), v(2));
            pure(vec![model, Type::INT], Type::dist(v(2)))
        }
        // Higher-order builtins share the function argument's answer type.
        Builtin::Map => {
            let f = Type::fun(v(1), g(), v(2), g());
            pure(vec![f, Type::vector(v(1))], Type::vector(v(2)))
        }
        Builtin::Repeat => {
            let f = Type::fun(Type::INT, g(), v(1), g());
            pure(vec![f, Type::INT], Type::vector(v(1)))
        }
        Builtin::Reduce => {
            let f = Type::fun(Type::Tuple(vec![v(2), v(1)]), g(), v(2), g());
            pure(vec![f, v(2), Type::vector(v(1))], v(2))
        }
        Builtin::Filter => {
            let f = Type::fun(v(1), g(), Type::BOOL, g());
            pure(vec![f, Type::vector(v(1))], Type::vector(v(1)))
        }
        Builtin::Length => pure(vec![Type::vector(v(1))], Type::INT),
        Builtin::Push => pure(vec![Type::vector(v(1)), v(1)], Type::vector(v(1))),
        Builtin::Concat => pure(
            vec![Type::vector(v(1)), Type::vector(v(1))],
            Type::vector(v(1)),
        ),
        Builtin::ToReal => pure(vec![Type::INT], Type::REAL),
        Builtin::Floor => pure(vec![Type::REAL], Type::INT),
        Builtin::Exp | Builtin::Log | Builtin::Sqrt => pure(vec![Type::REAL], Type::REAL),
        Builtin::Abs => {
            flags.push((1, VarFlags::NUMERIC));
            pure(vec![v(1)], v(1))
        }
        Builtin::Pow => pure(vec![Type::REAL, Type::REAL], Type::REAL),
    };
    let mut fv = std::collections::BTreeSet::new();
    ty.free_vars(&mut fv);
    (
        TypeScheme {
            vars: fv.into_iter().collect(),
            ty,
        },
        flags,
    )
}
