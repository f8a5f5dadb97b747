//! Library bindings written in the language itself and compiled ahead of
//! every program.

/// `sample` and `factor` capture the model's continuation and hand it to the
/// active inference handler. `infer-run` and `infer-resume` delimit a model
/// run and a resumed continuation for the engines.
pub const PRELUDE: &str = r#"
sample <- function (dist : ~a) : a {
  shift (k : a => b) {
    x <- sample-impl(dist, k);
    (x[0])(x[1])
  }
};
factor <- function (log-p : real) : unit {
  shift k {
    f <- factor-impl(log-p, k);
    f()
  }
};
infer-run <- function (m) { reset(m()) };
infer-resume <- function (k, v) { reset(k(v)) };
"#;

pub const PRELUDE_FILE: &str = "<prelude>";

/// Names bound by the prelude, in binding order.
pub const PRELUDE_NAMES: &[&str] = &["sample", "factor", "infer-run", "infer-resume"];
