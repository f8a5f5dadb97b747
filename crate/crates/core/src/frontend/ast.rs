//! Surface syntax tree.
//!
//! Equality on [`Expr`] is structural: node ids and spans are ignored, so two
//! parses of equivalent text compare equal.

use super::span::SourceSpan;

pub type NodeId = u32;

#[derive(Debug, Clone)]
pub struct Expr {
    pub id: NodeId,
    pub span: SourceSpan,
    pub kind: ExprKind,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Real(f64),
    Bool(bool),
    Unit,
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

/// Surface type syntax, as written in annotations and declarations.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeExpr {
    /// `int`, `real`, `bool`, `unit`, `string`.
    Base(String),
    /// `'a`, or a bare lowercase name in an annotation.
    Var(String),
    /// `~t`
    Dist(Box<TypeExpr>),
    /// `[t]`
    Vector(Box<TypeExpr>),
    Tuple(Vec<TypeExpr>),
    /// A declared type constructor, possibly applied: `List`, `(List int)`.
    App(String, Vec<TypeExpr>),
    /// `a => b`
    Fun(Box<TypeExpr>, Box<TypeExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Option<TypeExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda {
    pub params: Vec<Param>,
    pub ret: Option<TypeExpr>,
    pub body: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    /// `Nil`
    Empty,
    /// `Some x`
    Bind(String),
    /// `Cons (a, rest)`
    Tuple(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseArm {
    pub ctor: String,
    pub pattern: Pattern,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shift {
    pub k: String,
    /// `(k : t)` annotation, when written.
    pub k_ty: Option<TypeExpr>,
    /// `: t` annotation on the shift body, when written.
    pub body_ty: Option<TypeExpr>,
    pub body: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Bind(String, Expr),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    Var(String),
    Lambda(Lambda),
    Apply(Box<Expr>, Vec<Expr>),
    /// `x <- rhs; body`
    Bind(String, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Case(Box<Expr>, Vec<CaseArm>),
    Construct(String, Vec<Expr>),
    VectorLit(Vec<Expr>),
    Tuple(Vec<Expr>),
    /// `e[i]`: tuple projection or vector indexing, decided during typing.
    Index(Box<Expr>, Box<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    UnOp(UnOp, Box<Expr>),
    Shift(Shift),
    Reset(Box<Expr>),
    /// `{ s1; s2; e }` as parsed; desugaring nests it into `Bind`s.
    Block(Vec<Stmt>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub params: Vec<String>,
    pub ctors: Vec<(String, TypeExpr)>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct Binding {
    pub name: String,
    pub expr: Expr,
    pub span: SourceSpan,
    /// Bindings contributed by the standard prelude rather than the user.
    pub prelude: bool,
}

impl PartialEq for Binding {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.expr == other.expr
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub type_decls: Vec<TypeDecl>,
    pub bindings: Vec<Binding>,
    pub result: Expr,
    /// Next unused node id; rewrites allocate from here.
    pub next_id: NodeId,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.type_decls == other.type_decls
            && self.bindings == other.bindings
            && self.result == other.result
    }
}

impl Program {
    pub fn fresh_id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Every expression node in the program, pre-order.
    pub fn for_each_expr(&self, mut f: impl FnMut(&Expr)) {
        for b in &self.bindings {
            b.expr.walk(&mut f);
        }
        self.result.walk(&mut f);
    }
}

impl Expr {
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::Var(_) => {}
            ExprKind::Lambda(l) => l.body.walk(f),
            ExprKind::Apply(c, args) => {
                c.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::Bind(_, r, b) => {
                r.walk(f);
                b.walk(f);
            }
            ExprKind::If(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            ExprKind::Case(s, arms) => {
                s.walk(f);
                arms.iter().for_each(|a| a.body.walk(f));
            }
            ExprKind::Construct(_, xs) | ExprKind::VectorLit(xs) | ExprKind::Tuple(xs) => {
                xs.iter().for_each(|x| x.walk(f))
            }
            ExprKind::Index(a, b) | ExprKind::BinOp(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::UnOp(_, a) | ExprKind::Reset(a) => a.walk(f),
            ExprKind::Shift(s) => s.body.walk(f),
            ExprKind::Block(stmts, last) => {
                for s in stmts {
                    match s {
                        Stmt::Bind(_, e) | Stmt::Expr(e) => e.walk(f),
                    }
                }
                last.walk(f);
            }
        }
    }

    pub fn is_syntactic_value(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Lambda(_) | ExprKind::Literal(_) | ExprKind::Var(_)
        )
    }
}
