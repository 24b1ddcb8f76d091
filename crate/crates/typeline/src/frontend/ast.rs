//! MiniC abstract syntax.
//!
//! The parser produces this untyped tree; the analyzer walks it for
//! static counts and the checker turns it into a typed program. Every
//! declaration, statement, and expression carries its source position.

use super::lexer::Pos;

/// Type qualifiers. They are counted by the analyzer; `const` is
/// enforced at assignment, `static` and `unsigned` carry no semantics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Quals {
    pub is_static: bool,
    pub is_const: bool,
    pub is_unsigned: bool,
}

/// A spelled-out type name, before typedef resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeName {
    Int,
    Float,
    Double,
    Long,
    Char,
    Void,
    /// `struct Foo`
    Struct(String),
    /// `enum Color`
    Enum(String),
    /// A typedef name.
    Alias(String),
}

impl TypeName {
    pub fn describe(&self) -> String {
        match self {
            TypeName::Int => "int".into(),
            TypeName::Float => "float".into(),
            TypeName::Double => "double".into(),
            TypeName::Long => "long".into(),
            TypeName::Char => "char".into(),
            TypeName::Void => "void".into(),
            TypeName::Struct(n) => format!("struct {n}"),
            TypeName::Enum(n) => format!("enum {n}"),
            TypeName::Alias(n) => n.clone(),
        }
    }
}

/// A declared type: qualifiers, base name, and optional one-level `*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclType {
    pub quals: Quals,
    pub name: TypeName,
    pub pointer: bool,
}

/// A variable declaration (global or local).
#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub ty: DeclType,
    pub name: String,
    /// `Some(n)` for a one-dimensional array `name[n]`.
    pub array: Option<u32>,
    pub init: Option<Init>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Expr(Expr),
    /// Brace-enclosed element list for an array.
    List(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDecl {
    pub ret: DeclType,
    pub name: String,
    pub params: Vec<(DeclType, String)>,
    pub body: Block,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Global(VarDecl),
    Func(FuncDecl),
    StructDef { name: String, fields: Vec<(DeclType, String)>, pos: Pos },
    EnumDef { name: String, variants: Vec<(String, Option<i64>)>, pos: Pos },
    Typedef { ty: DeclType, name: String, pos: Pos },
}

/// A parsed translation unit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ast {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl(VarDecl),
    /// `target op= value`; plain `=` has `op: None`. `i++` parses as
    /// `i += 1`.
    Assign { target: Expr, op: Option<BinOp>, value: Expr },
    If { cond: Expr, then_blk: Block, else_blk: Option<Block> },
    While { cond: Expr, body: Block },
    For { init: Option<Box<Stmt>>, cond: Expr, step: Option<Box<Stmt>>, body: Block },
    Return(Option<Expr>),
    /// `delete h;` releases the object behind handle expression `h`.
    Delete(Expr),
    /// An expression evaluated for effect (a call).
    ExprStmt(Expr),
    Block(Block),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// `-x`
    Neg,
    /// `!x`
    Not,
    /// `~x`
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    BitAnd,
    BitOr,
    BitXor,
    /// Not parseable; the checker desugars `~x` into `xnor(x, 0)`.
    BitXnor,
    LogAnd,
    LogOr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::LogAnd | BinOp::LogOr)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::BitXnor => "~^",
            BinOp::LogAnd => "&&",
            BinOp::LogOr => "||",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    IntLit(i64),
    LongLit(i64),
    FloatLit(f32),
    DoubleLit(f64),
    CharLit(u8),
    Var(String),
    /// `a[i]` where `a` names a one-dimensional array.
    Index { base: String, index: Box<Expr> },
    /// `s.f` where `s` names a struct variable.
    Field { base: String, field: String },
    Unary { op: UnOp, expr: Box<Expr> },
    Bin { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { name: String, args: Vec<Expr> },
    /// `&lvalue`
    AddrOf(Box<Expr>),
    /// `*p`
    Deref(Box<Expr>),
    /// `new T[n]`: allocates an object and yields its int handle.
    New { elem: TypeName, count: Box<Expr> },
}

impl Expr {
    /// Whether this expression can stand on the left of `=`.
    pub fn is_lvalue(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Var(_) | ExprKind::Index { .. } | ExprKind::Field { .. } | ExprKind::Deref(_)
        )
    }
}
