//! Type checking: names, conversions, and storage layout.
//!
//! [`check`] turns a parsed [`Ast`] into a [`TypedProgram`]:
//!
//! * every name is resolved to a global or local id; struct variables
//!   are expanded into one scalar variable per field (kept on the
//!   traditional path), enum variables become longs, enum constants
//!   become literals;
//! * every implicit conversion becomes an explicit [`TExprKind::Convert`]
//!   node; widenings between scalar datatypes follow the chain
//!   char to int to float/double to double, one step per node, and
//!   narrowing is rejected;
//! * logical `&&`/`||` are eager and normalized to bitwise ops over
//!   zero/one comparison results, `!`/`-`/`~` are desugared;
//! * int literals retype to the context (char when in 0..=255, long,
//!   float, or double) instead of converting at runtime;
//! * every global, and every local whose address is needed, gets a
//!   static word address; the layout is shared by the interpreter and
//!   the lowering so pointer values agree bit for bit.
//!
//! Language rules enforced here and relied on downstream: char
//! arithmetic stays 8-bit and wrapping except `*`, `/`, `%`, which
//! promote to int; comparisons yield int; long never mixes with float
//! or double; unary minus is `0 - x`.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::Pos;
use super::FrontendError;
use crate::isa::{Imm, Scalar, SdtKind};

type Result<T> = std::result::Result<T, FrontendError>;

/// A resolved value type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValTy {
    Int,
    Float,
    Double,
    Long,
    Char,
    /// One-level pointer to a scalar in static memory.
    Ptr(Scalar),
    Void,
}

impl ValTy {
    /// The machine scalar that stores this value. Pointers are word
    /// addresses held as longs.
    pub fn scalar(self) -> Option<Scalar> {
        match self {
            ValTy::Int => Some(Scalar::Int),
            ValTy::Float => Some(Scalar::Float),
            ValTy::Double => Some(Scalar::Double),
            ValTy::Long | ValTy::Ptr(_) => Some(Scalar::Long),
            ValTy::Char => Some(Scalar::Char),
            ValTy::Void => None,
        }
    }

    pub fn sdt(self) -> Option<SdtKind> {
        match self {
            ValTy::Int => Some(SdtKind::Int),
            ValTy::Float => Some(SdtKind::Float),
            ValTy::Double => Some(SdtKind::Double),
            ValTy::Char => Some(SdtKind::Char),
            _ => None,
        }
    }

    pub fn from_sdt(k: SdtKind) -> ValTy {
        match k {
            SdtKind::Int => ValTy::Int,
            SdtKind::Float => ValTy::Float,
            SdtKind::Double => ValTy::Double,
            SdtKind::Char => ValTy::Char,
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, ValTy::Int | ValTy::Long | ValTy::Char)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ValTy::Int | ValTy::Float | ValTy::Double | ValTy::Long | ValTy::Char)
    }

    pub fn name(self) -> String {
        match self {
            ValTy::Int => "int".into(),
            ValTy::Float => "float".into(),
            ValTy::Double => "double".into(),
            ValTy::Long => "long".into(),
            ValTy::Char => "char".into(),
            ValTy::Ptr(s) => format!("{}*", s.name()),
            ValTy::Void => "void".into(),
        }
    }
}

/// Index into [`TypedProgram::globals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GlobalId(pub u32);

/// Index into the owning function's locals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    Global(GlobalId),
    Local(LocalId),
}

#[derive(Debug, Clone)]
pub struct TGlobal {
    pub name: String,
    pub ty: ValTy,
    /// Element count; 1 for scalars.
    pub count: u32,
    /// Static word address, assigned by layout.
    pub addr: u32,
    /// Initial values, `count` entries.
    pub init: Vec<Imm>,
    pub is_const: bool,
    /// Struct fields stay on the traditional path.
    pub trad_only: bool,
    /// Initialized with a brace list. Such arrays are (re)written by
    /// startup stores, which therefore win over any input binding.
    pub has_list: bool,
}

#[derive(Debug, Clone)]
pub struct TLocal {
    pub name: String,
    pub ty: ValTy,
    /// `Some(n)` for arrays, which always live in memory.
    pub count: Option<u32>,
    pub is_const: bool,
    /// Struct fields stay on the traditional path.
    pub trad_only: bool,
    /// Whether `&` was taken of this local (forces a memory slot).
    pub addressed: bool,
    /// Static word address for arrays and addressed locals.
    pub slot: Option<u32>,
}

impl TLocal {
    /// Memory-resident locals: arrays and anything whose address
    /// escapes into a pointer.
    pub fn in_memory(&self) -> bool {
        self.count.is_some() || self.addressed
    }
}

#[derive(Debug, Clone)]
pub struct TFunc {
    pub name: String,
    pub ret: ValTy,
    /// The first `params.len()` locals are the parameters.
    pub params: usize,
    pub locals: Vec<TLocal>,
    pub body: Vec<TStmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub globals: Vec<TGlobal>,
    pub funcs: Vec<TFunc>,
    /// Index of `main` in `funcs`.
    pub main: usize,
    /// One past the highest static word address.
    pub mem_extent: u32,
}

impl TypedProgram {
    pub fn global(&self, id: GlobalId) -> &TGlobal {
        &self.globals[id.0 as usize]
    }

    pub fn func_named(&self, name: &str) -> Option<(usize, &TFunc)> {
        self.funcs.iter().enumerate().find(|(_, f)| f.name == name)
    }
}

#[derive(Debug, Clone)]
pub enum TStmt {
    AssignVar { var: VarRef, value: TExpr },
    AssignIndex { arr: VarRef, index: TExpr, value: TExpr },
    AssignDeref { ptr: TExpr, pointee: Scalar, value: TExpr },
    If { cond: TExpr, then_blk: Vec<TStmt>, else_blk: Vec<TStmt> },
    While { cond: TExpr, body: Vec<TStmt> },
    For { init: Vec<TStmt>, cond: TExpr, step: Vec<TStmt>, body: Vec<TStmt> },
    Return { value: Option<TExpr>, pos: Pos },
    Delete(TExpr),
    Eval(TExpr),
}

#[derive(Debug, Clone)]
pub struct TExpr {
    pub ty: ValTy,
    pub pos: Pos,
    pub kind: TExprKind,
}

#[derive(Debug, Clone)]
pub enum TExprKind {
    Imm(Imm),
    Read(VarRef),
    ReadIndex { arr: VarRef, index: Box<TExpr> },
    ReadDeref { ptr: Box<TExpr>, pointee: Scalar },
    AddrOfVar(VarRef),
    AddrOfIndex { arr: VarRef, index: Box<TExpr> },
    /// One conversion step; the target is the node's `ty`.
    Convert(Box<TExpr>),
    Bin { op: BinOp, lhs: Box<TExpr>, rhs: Box<TExpr> },
    /// Comparison over operands of type `cmp_ty`; the result is int 0/1.
    Cmp { pred: BinOp, cmp_ty: ValTy, lhs: Box<TExpr>, rhs: Box<TExpr> },
    Call { func: usize, args: Vec<TExpr> },
    /// Allocate `count` elements of `elem`; yields an int handle.
    New { elem: Scalar, count: Box<TExpr> },
}

/// Type-check a parsed unit and lay out static storage.
pub fn check(ast: &Ast) -> Result<TypedProgram> {
    let mut ck = Checker::default();
    ck.collect(ast)?;
    ck.check_functions(ast)?;
    ck.finish()
}

/// What a base type name resolves to.
#[derive(Debug, Clone, PartialEq, Eq)]
enum BaseTy {
    Val(ValTy),
    Struct(String),
}

#[derive(Debug, Clone)]
struct FuncSig {
    name: String,
    ret: ValTy,
    params: Vec<ValTy>,
}

#[derive(Debug, Clone)]
enum Binding {
    Scalar(VarRef),
    /// A struct variable: field name to the expanded member variable.
    Fields(String, BTreeMap<String, VarRef>),
}

#[derive(Default)]
struct Checker {
    structs: BTreeMap<String, Vec<(String, ValTy)>>,
    /// typedef name -> (base, pointer)
    typedefs: BTreeMap<String, (BaseTy, bool)>,
    enums: BTreeMap<String, Vec<String>>,
    /// Enum constant values, a single flat namespace.
    consts: BTreeMap<String, i64>,
    globals: Vec<TGlobal>,
    global_scope: BTreeMap<String, Binding>,
    sigs: Vec<FuncSig>,
    funcs: Vec<TFunc>,
}

impl Checker {
    fn def_err<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T> {
        Err(FrontendError::Definition { pos, msg: msg.into() })
    }

    /// Resolve a spelled type to its base, following typedefs.
    fn resolve(&self, ty: &DeclType, pos: Pos) -> Result<(BaseTy, bool)> {
        if ty.quals.is_unsigned {
            let integer = matches!(
                ty.name,
                TypeName::Int | TypeName::Long | TypeName::Char
            ) || matches!(&ty.name, TypeName::Alias(a)
                if matches!(self.typedefs.get(a), Some((BaseTy::Val(v), false)) if v.is_integer()));
            if !integer {
                return self.def_err(pos, "`unsigned` applies to integer types only");
            }
        }
        let (base, mut pointer) = match &ty.name {
            TypeName::Int => (BaseTy::Val(ValTy::Int), false),
            TypeName::Float => (BaseTy::Val(ValTy::Float), false),
            TypeName::Double => (BaseTy::Val(ValTy::Double), false),
            TypeName::Long => (BaseTy::Val(ValTy::Long), false),
            TypeName::Char => (BaseTy::Val(ValTy::Char), false),
            TypeName::Void => (BaseTy::Val(ValTy::Void), false),
            TypeName::Struct(n) => {
                if !self.structs.contains_key(n) {
                    return self.def_err(pos, format!("unknown struct `{n}`"));
                }
                (BaseTy::Struct(n.clone()), false)
            }
            TypeName::Enum(n) => {
                if !self.enums.contains_key(n) {
                    return self.def_err(pos, format!("unknown enum `{n}`"));
                }
                (BaseTy::Val(ValTy::Long), false)
            }
            TypeName::Alias(n) => match self.typedefs.get(n) {
                Some(t) => t.clone(),
                None => return self.def_err(pos, format!("unknown type `{n}`")),
            },
        };
        if ty.pointer {
            if pointer {
                return Err(FrontendError::Unsupported {
                    pos,
                    what: "multi-level pointer".into(),
                });
            }
            pointer = true;
        }
        if pointer {
            let BaseTy::Val(v) = &base else {
                return Err(FrontendError::Unsupported {
                    pos,
                    what: "pointer to struct".into(),
                });
            };
            if matches!(v, ValTy::Ptr(_)) {
                return Err(FrontendError::Unsupported {
                    pos,
                    what: "multi-level pointer".into(),
                });
            }
            let Some(s) = v.scalar() else {
                return self.def_err(pos, "pointer to void");
            };
            return Ok((BaseTy::Val(ValTy::Ptr(s)), false));
        }
        Ok((base, false))
    }

    /// Resolve to a scalar value type, rejecting structs.
    fn resolve_val(&self, ty: &DeclType, pos: Pos, what: &str) -> Result<ValTy> {
        match self.resolve(ty, pos)? {
            (BaseTy::Val(v), _) => Ok(v),
            (BaseTy::Struct(n), _) => {
                Err(FrontendError::Unsupported { pos, what: format!("struct {n} {what}") })
            }
        }
    }

    /// First pass: composite definitions, globals, and signatures.
    fn collect(&mut self, ast: &Ast) -> Result<()> {
        for item in &ast.items {
            match item {
                Item::StructDef { name, fields, pos } => {
                    if self.structs.contains_key(name) {
                        return self.def_err(*pos, format!("duplicate struct `{name}`"));
                    }
                    let mut fs: Vec<(String, ValTy)> = Vec::new();
                    for (fty, fname) in fields {
                        if fs.iter().any(|(n, _)| n == fname) {
                            return self.def_err(*pos, format!("duplicate field `{fname}`"));
                        }
                        let v = self.resolve_val(fty, *pos, "field")?;
                        if !v.is_numeric() {
                            return self.def_err(*pos, format!("field `{fname}` must be numeric"));
                        }
                        fs.push((fname.clone(), v));
                    }
                    self.structs.insert(name.clone(), fs);
                }
                Item::EnumDef { name, variants, pos } => {
                    if self.enums.contains_key(name) {
                        return self.def_err(*pos, format!("duplicate enum `{name}`"));
                    }
                    let mut next = 0i64;
                    let mut names = Vec::new();
                    for (vname, value) in variants {
                        if self.consts.contains_key(vname) {
                            return self.def_err(*pos, format!("duplicate enum constant `{vname}`"));
                        }
                        let v = value.unwrap_or(next);
                        next = v + 1;
                        self.consts.insert(vname.clone(), v);
                        names.push(vname.clone());
                    }
                    self.enums.insert(name.clone(), names);
                }
                Item::Typedef { ty, name, pos } => {
                    if self.typedefs.contains_key(name) {
                        return self.def_err(*pos, format!("duplicate typedef `{name}`"));
                    }
                    let resolved = self.resolve(ty, *pos)?;
                    if resolved == (BaseTy::Val(ValTy::Void), false) {
                        return self.def_err(*pos, "typedef of void");
                    }
                    self.typedefs.insert(name.clone(), resolved);
                }
                Item::Global(d) => self.collect_global(d)?,
                Item::Func(f) => {
                    if self.sigs.iter().any(|s| s.name == f.name) {
                        return self.def_err(f.pos, format!("duplicate function `{}`", f.name));
                    }
                    if self.global_scope.contains_key(&f.name) {
                        return self.def_err(f.pos, format!("`{}` already names a global", f.name));
                    }
                    let ret = self.resolve_val(&f.ret, f.pos, "return value")?;
                    let mut params = Vec::new();
                    for (pty, _) in &f.params {
                        let v = self.resolve_val(pty, f.pos, "parameter")?;
                        if v == ValTy::Void {
                            return self.def_err(f.pos, "void parameter");
                        }
                        params.push(v);
                    }
                    self.sigs.push(FuncSig { name: f.name.clone(), ret, params });
                }
            }
        }
        Ok(())
    }

    fn name_free(&self, name: &str, pos: Pos) -> Result<()> {
        if self.global_scope.contains_key(name)
            || self.consts.contains_key(name)
            || self.sigs.iter().any(|s| s.name == name)
        {
            return self.def_err(pos, format!("duplicate name `{name}`"));
        }
        Ok(())
    }

    fn collect_global(&mut self, d: &VarDecl) -> Result<()> {
        self.name_free(&d.name, d.pos)?;
        if d.name.starts_with("__") {
            return self.def_err(d.pos, "names starting with `__` are reserved");
        }
        let (base, _) = self.resolve(&d.ty, d.pos)?;
        match base {
            BaseTy::Val(ValTy::Void) => self.def_err(d.pos, "void variable"),
            BaseTy::Val(ty) => {
                let count = d.array.unwrap_or(1);
                let init = self.const_init(d, ty, count)?;
                let id = GlobalId(self.globals.len() as u32);
                self.globals.push(TGlobal {
                    name: d.name.clone(),
                    ty,
                    count,
                    addr: 0,
                    init,
                    is_const: d.ty.quals.is_const,
                    trad_only: false,
                    has_list: matches!(d.init, Some(Init::List(_))),
                });
                self.global_scope.insert(d.name.clone(), Binding::Scalar(VarRef::Global(id)));
                Ok(())
            }
            BaseTy::Struct(sname) => {
                if d.array.is_some() {
                    return Err(FrontendError::Unsupported {
                        pos: d.pos,
                        what: "array of structs".into(),
                    });
                }
                if d.init.is_some() {
                    return self.def_err(d.pos, "struct variables take no initializer");
                }
                let fields = self.structs[&sname].clone();
                let mut map = BTreeMap::new();
                for (fname, fty) in fields {
                    let id = GlobalId(self.globals.len() as u32);
                    self.globals.push(TGlobal {
                        name: format!("{}.{}", d.name, fname),
                        ty: fty,
                        count: 1,
                        addr: 0,
                        init: vec![zero_imm(fty)],
                        is_const: d.ty.quals.is_const,
                        trad_only: true,
                        has_list: false,
                    });
                    map.insert(fname, VarRef::Global(id));
                }
                self.global_scope.insert(d.name.clone(), Binding::Fields(sname, map));
                Ok(())
            }
        }
    }

    /// Evaluate a constant initializer: literals, enum constants, and
    /// unary minus over those.
    fn const_value(&self, e: &Expr) -> Result<Imm> {
        match &e.kind {
            ExprKind::IntLit(v) => match i32::try_from(*v) {
                Ok(v) => Ok(Imm::Int(v)),
                Err(_) => self.def_err(e.pos, "integer literal exceeds int range (use `L`)"),
            },
            ExprKind::LongLit(v) => Ok(Imm::Long(*v)),
            ExprKind::FloatLit(v) => Ok(Imm::Float(*v)),
            ExprKind::DoubleLit(v) => Ok(Imm::Double(*v)),
            ExprKind::CharLit(v) => Ok(Imm::Char(*v)),
            ExprKind::Var(n) => match self.consts.get(n) {
                Some(v) => Ok(Imm::Long(*v)),
                None => self.def_err(e.pos, "global initializers must be constant"),
            },
            ExprKind::Unary { op: UnOp::Neg, expr } => match self.const_value(expr)? {
                Imm::Long(v) => Ok(Imm::Long(-v)),
                Imm::Float(v) => Ok(Imm::Float(-v)),
                Imm::Double(v) => Ok(Imm::Double(-v)),
                Imm::Char(_) => self.def_err(e.pos, "cannot negate a char constant"),
                Imm::Int(v) => Ok(Imm::Int(-v)),
            },
            _ => self.def_err(e.pos, "global initializers must be constant"),
        }
    }

    fn const_init(&self, d: &VarDecl, ty: ValTy, count: u32) -> Result<Vec<Imm>> {
        let mut vals = vec![zero_imm(ty); count as usize];
        match (&d.init, d.array) {
            (None, _) => {}
            (Some(Init::Expr(e)), None) => {
                let raw = self.const_value(e)?;
                vals[0] = fit_global(raw, ty).ok_or_else(|| FrontendError::Type {
                    pos: d.pos,
                    msg: format!("initializer does not fit `{}`", ty.name()),
                })?;
            }
            (Some(Init::Expr(_)), Some(_)) => {
                return self.def_err(d.pos, "array initializer must be a brace list");
            }
            (Some(Init::List(es)), Some(n)) => {
                if es.len() > n as usize {
                    return self.def_err(d.pos, "too many array initializer elements");
                }
                for (i, e) in es.iter().enumerate() {
                    let raw = self.const_value(e)?;
                    vals[i] = fit_global(raw, ty).ok_or_else(|| FrontendError::Type {
                        pos: e.pos,
                        msg: format!("initializer does not fit `{}`", ty.name()),
                    })?;
                }
            }
            (Some(Init::List(_)), None) => {
                return self.def_err(d.pos, "brace initializer on a scalar");
            }
        }
        Ok(vals)
    }

    fn check_functions(&mut self, ast: &Ast) -> Result<()> {
        for item in &ast.items {
            if let Item::Func(f) = item {
                let tf = FuncChecker::run(self, f)?;
                self.funcs.push(tf);
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<TypedProgram> {
        let main = match self.funcs.iter().position(|f| f.name == "main") {
            Some(i) => i,
            None => {
                return self.def_err(Pos { line: 1, col: 1 }, "program has no `main` function")
            }
        };
        if self.funcs[main].params != 0 {
            let pos = self.funcs[main].pos;
            return self.def_err(pos, "`main` takes no parameters");
        }
        // Layout: globals in declaration order, then memory-resident
        // locals function by function.
        let mut addr = 0u32;
        for g in &mut self.globals {
            g.addr = addr;
            addr += g.count;
        }
        for f in &mut self.funcs {
            for l in &mut f.locals {
                if l.in_memory() {
                    l.slot = Some(addr);
                    addr += l.count.unwrap_or(1);
                }
            }
        }
        Ok(TypedProgram {
            globals: self.globals,
            funcs: self.funcs,
            main,
            mem_extent: addr,
        })
    }
}

pub(crate) fn zero_imm(ty: ValTy) -> Imm {
    match ty {
        ValTy::Int => Imm::Int(0),
        ValTy::Float => Imm::Float(0.0),
        ValTy::Double => Imm::Double(0.0),
        ValTy::Long | ValTy::Ptr(_) => Imm::Long(0),
        ValTy::Char => Imm::Char(0),
        ValTy::Void => Imm::Int(0),
    }
}

/// Fit a constant into a declared type, exactly or not at all.
fn fit_const(raw: Imm, ty: ValTy) -> Option<Imm> {
    match (raw, ty) {
        (Imm::Long(v), ValTy::Int) => i32::try_from(v).ok().map(Imm::Int),
        (Imm::Long(v), ValTy::Long) => Some(Imm::Long(v)),
        (Imm::Long(v), ValTy::Char) => u8::try_from(v).ok().map(Imm::Char),
        (Imm::Long(v), ValTy::Float) => {
            // Integer literals retype exactly or not at all.
            ((v as f32) as i64 == v).then_some(Imm::Float(v as f32))
        }
        (Imm::Long(v), ValTy::Double) => {
            ((v as f64) as i64 == v).then_some(Imm::Double(v as f64))
        }
        (Imm::Float(v), ValTy::Float) => Some(Imm::Float(v)),
        (Imm::Float(v), ValTy::Double) => Some(Imm::Double(v as f64)),
        (Imm::Double(v), ValTy::Double) => Some(Imm::Double(v)),
        (Imm::Double(v), ValTy::Float) => Some(Imm::Float(v as f32)),
        (Imm::Char(v), ValTy::Char) => Some(Imm::Char(v)),
        (Imm::Char(v), ValTy::Int) => Some(Imm::Int(v as i32)),
        (Imm::Char(v), ValTy::Long) => Some(Imm::Long(v as i64)),
        (Imm::Char(v), ValTy::Float) => Some(Imm::Float(v as f32)),
        (Imm::Char(v), ValTy::Double) => Some(Imm::Double(v as f64)),
        _ => None,
    }
}

/// Fit a global initializer constant. Unsuffixed integer literals
/// retype into any target they represent exactly; an explicit `L`
/// suffix (and enum constants, which are long) never narrows.
fn fit_global(raw: Imm, ty: ValTy) -> Option<Imm> {
    match raw {
        Imm::Int(v) => fit_const(Imm::Long(v as i64), ty),
        Imm::Long(_) => (ty == ValTy::Long).then_some(raw),
        other => fit_const(other, ty),
    }
}

/// Retype a literal expression to a context type when exact. An
/// explicit `L` suffix pins the literal to long and never narrows.
fn fit_literal(e: &TExpr, ty: ValTy) -> Option<TExpr> {
    let TExprKind::Imm(imm) = &e.kind else { return None };
    if e.ty == ty {
        return Some(e.clone());
    }
    let raw = match *imm {
        Imm::Int(v) => Imm::Long(v as i64),
        Imm::Long(_) => return None,
        other => other,
    };
    let fitted = fit_const(raw, ty)?;
    Some(TExpr { ty, pos: e.pos, kind: TExprKind::Imm(fitted) })
}

/// The widening chain between scalar datatypes: each returned step is
/// one Convert node. `None` means no chain exists (a narrowing).
fn widen_steps(from: SdtKind, to: SdtKind) -> Option<Vec<SdtKind>> {
    use SdtKind::*;
    Some(match (from, to) {
        (a, b) if a == b => vec![],
        (Char, Int) => vec![Int],
        (Char, Float) => vec![Int, Float],
        (Char, Double) => vec![Int, Double],
        (Int, Float) => vec![Float],
        (Int, Double) => vec![Double],
        (Float, Double) => vec![Double],
        _ => return None,
    })
}

struct FuncChecker<'a> {
    ck: &'a Checker,
    locals: Vec<TLocal>,
    scopes: Vec<BTreeMap<String, Binding>>,
    ret: ValTy,
}

impl<'a> FuncChecker<'a> {
    fn run(ck: &Checker, f: &FuncDecl) -> Result<TFunc> {
        let sig = ck.sigs.iter().find(|s| s.name == f.name).expect("collected").clone();
        let mut fc = FuncChecker { ck, locals: Vec::new(), scopes: vec![BTreeMap::new()], ret: sig.ret };
        for ((_, pname), pty) in f.params.iter().zip(&sig.params) {
            fc.add_scalar_local(pname.clone(), *pty, false, false, f.pos)?;
        }
        let body = fc.check_block(&f.body)?;
        Ok(TFunc {
            name: f.name.clone(),
            ret: sig.ret,
            params: sig.params.len(),
            locals: fc.locals,
            body,
            pos: f.pos,
        })
    }

    fn ty_err<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T> {
        Err(FrontendError::Type { pos, msg: msg.into() })
    }

    fn add_scalar_local(
        &mut self,
        name: String,
        ty: ValTy,
        is_const: bool,
        trad_only: bool,
        pos: Pos,
    ) -> Result<LocalId> {
        self.declare_check(&name, pos)?;
        let id = LocalId(self.locals.len() as u32);
        self.locals.push(TLocal {
            name: name.clone(),
            ty,
            count: None,
            is_const,
            trad_only,
            addressed: false,
            slot: None,
        });
        self.scopes
            .last_mut()
            .expect("scope")
            .insert(name, Binding::Scalar(VarRef::Local(id)));
        Ok(id)
    }

    fn declare_check(&self, name: &str, pos: Pos) -> Result<()> {
        if self.scopes.last().expect("scope").contains_key(name) {
            return Err(FrontendError::Definition {
                pos,
                msg: format!("duplicate declaration of `{name}` in this scope"),
            });
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        for scope in self.scopes.iter().rev() {
            if let Some(b) = scope.get(name) {
                return Some(b);
            }
        }
        self.ck.global_scope.get(name)
    }

    fn var_ty(&self, r: VarRef) -> ValTy {
        match r {
            VarRef::Global(g) => self.ck.globals[g.0 as usize].ty,
            VarRef::Local(l) => self.locals[l.0 as usize].ty,
        }
    }

    fn var_is_array(&self, r: VarRef) -> bool {
        match r {
            VarRef::Global(g) => self.ck.globals[g.0 as usize].count > 1,
            VarRef::Local(l) => self.locals[l.0 as usize].count.is_some(),
        }
    }

    fn var_is_const(&self, r: VarRef) -> bool {
        match r {
            VarRef::Global(g) => self.ck.globals[g.0 as usize].is_const,
            VarRef::Local(l) => self.locals[l.0 as usize].is_const,
        }
    }

    fn var_name(&self, r: VarRef) -> String {
        match r {
            VarRef::Global(g) => self.ck.globals[g.0 as usize].name.clone(),
            VarRef::Local(l) => self.locals[l.0 as usize].name.clone(),
        }
    }

    fn var_trad(&self, r: VarRef) -> bool {
        match r {
            VarRef::Global(g) => self.ck.globals[g.0 as usize].trad_only,
            VarRef::Local(l) => self.locals[l.0 as usize].trad_only,
        }
    }

    fn mark_addressed(&mut self, r: VarRef) {
        if let VarRef::Local(l) = r {
            self.locals[l.0 as usize].addressed = true;
        }
    }

    fn check_block(&mut self, b: &Block) -> Result<Vec<TStmt>> {
        self.scopes.push(BTreeMap::new());
        let out = self.check_stmts(&b.stmts);
        self.scopes.pop();
        out
    }

    fn check_stmts(&mut self, stmts: &[Stmt]) -> Result<Vec<TStmt>> {
        let mut out = Vec::new();
        for s in stmts {
            self.check_stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn check_stmt(&mut self, s: &Stmt, out: &mut Vec<TStmt>) -> Result<()> {
        match &s.kind {
            StmtKind::Decl(d) => self.check_decl(d, out),
            StmtKind::Assign { target, op, value } => {
                let st = self.check_assign(target, *op, value, s.pos)?;
                out.push(st);
                Ok(())
            }
            StmtKind::If { cond, then_blk, else_blk } => {
                let cond = self.check_cond(cond)?;
                let then_blk = self.check_block(then_blk)?;
                let else_blk = match else_blk {
                    Some(b) => self.check_block(b)?,
                    None => Vec::new(),
                };
                out.push(TStmt::If { cond, then_blk, else_blk });
                Ok(())
            }
            StmtKind::While { cond, body } => {
                let cond = self.check_cond(cond)?;
                let body = self.check_block(body)?;
                out.push(TStmt::While { cond, body });
                Ok(())
            }
            StmtKind::For { init, cond, step, body } => {
                // The init declaration scopes over cond, step, and body.
                self.scopes.push(BTreeMap::new());
                let r: Result<TStmt> = (|| {
                    let init = match init {
                        Some(s) => {
                            let mut v = Vec::new();
                            self.check_stmt(s, &mut v)?;
                            v
                        }
                        None => Vec::new(),
                    };
                    let cond = self.check_cond(cond)?;
                    let step = match step {
                        Some(s) => {
                            let mut v = Vec::new();
                            self.check_stmt(s, &mut v)?;
                            v
                        }
                        None => Vec::new(),
                    };
                    let body = self.check_block(body)?;
                    Ok(TStmt::For { init, cond, step, body })
                })();
                self.scopes.pop();
                out.push(r?);
                Ok(())
            }
            StmtKind::Return(value) => {
                let value = match (value, self.ret) {
                    (None, ValTy::Void) => None,
                    (None, _) => {
                        return self.ty_err(s.pos, "non-void function returns without a value")
                    }
                    (Some(_), ValTy::Void) => {
                        return self.ty_err(s.pos, "void function returns a value")
                    }
                    (Some(e), ret) => {
                        let te = self.check_expr(e)?;
                        Some(self.coerce(te, ret, e.pos)?)
                    }
                };
                out.push(TStmt::Return { value, pos: s.pos });
                Ok(())
            }
            StmtKind::Delete(e) => {
                let te = self.check_expr(e)?;
                let te = self.coerce(te, ValTy::Int, e.pos)?;
                out.push(TStmt::Delete(te));
                Ok(())
            }
            StmtKind::ExprStmt(e) => {
                let te = self.check_expr(e)?;
                out.push(TStmt::Eval(te));
                Ok(())
            }
            StmtKind::Block(b) => {
                let stmts = self.check_block(b)?;
                // Keep block scoping but flatten into the parent list.
                out.extend(stmts);
                Ok(())
            }
        }
    }

    fn check_decl(&mut self, d: &VarDecl, out: &mut Vec<TStmt>) -> Result<()> {
        let (base, _) = self.ck.resolve(&d.ty, d.pos)?;
        match base {
            BaseTy::Val(ValTy::Void) => {
                Err(FrontendError::Definition { pos: d.pos, msg: "void variable".into() })
            }
            BaseTy::Val(ty) => match d.array {
                None => {
                    let init = match &d.init {
                        None => TExpr { ty, pos: d.pos, kind: TExprKind::Imm(zero_imm(ty)) },
                        Some(Init::Expr(e)) => {
                            let te = self.check_expr(e)?;
                            self.coerce(te, ty, e.pos)?
                        }
                        Some(Init::List(_)) => {
                            return Err(FrontendError::Definition {
                                pos: d.pos,
                                msg: "brace initializer on a scalar".into(),
                            })
                        }
                    };
                    let id = self.add_scalar_local(
                        d.name.clone(),
                        ty,
                        d.ty.quals.is_const,
                        false,
                        d.pos,
                    )?;
                    out.push(TStmt::AssignVar { var: VarRef::Local(id), value: init });
                    Ok(())
                }
                Some(n) => {
                    if ty == ValTy::Void || matches!(ty, ValTy::Ptr(_)) {
                        return Err(FrontendError::Unsupported {
                            pos: d.pos,
                            what: "array of pointers".into(),
                        });
                    }
                    let elems: Vec<TExpr> = match &d.init {
                        None => Vec::new(),
                        Some(Init::List(es)) => {
                            if es.len() > n as usize {
                                return Err(FrontendError::Definition {
                                    pos: d.pos,
                                    msg: "too many array initializer elements".into(),
                                });
                            }
                            es.iter()
                                .map(|e| {
                                    let te = self.check_expr(e)?;
                                    self.coerce(te, ty, e.pos)
                                })
                                .collect::<Result<_>>()?
                        }
                        Some(Init::Expr(_)) => {
                            return Err(FrontendError::Definition {
                                pos: d.pos,
                                msg: "array initializer must be a brace list".into(),
                            })
                        }
                    };
                    self.declare_check(&d.name, d.pos)?;
                    let id = LocalId(self.locals.len() as u32);
                    self.locals.push(TLocal {
                        name: d.name.clone(),
                        ty,
                        count: Some(n),
                        is_const: d.ty.quals.is_const,
                        trad_only: false,
                        addressed: false,
                        slot: None,
                    });
                    self.scopes
                        .last_mut()
                        .expect("scope")
                        .insert(d.name.clone(), Binding::Scalar(VarRef::Local(id)));
                    // Local arrays re-zero at every declaration, then
                    // apply the explicit elements.
                    for i in 0..n {
                        let value = match elems.get(i as usize) {
                            Some(e) => e.clone(),
                            None => TExpr { ty, pos: d.pos, kind: TExprKind::Imm(zero_imm(ty)) },
                        };
                        out.push(TStmt::AssignIndex {
                            arr: VarRef::Local(id),
                            index: TExpr {
                                ty: ValTy::Int,
                                pos: d.pos,
                                kind: TExprKind::Imm(Imm::Int(i as i32)),
                            },
                            value,
                        });
                    }
                    Ok(())
                }
            },
            BaseTy::Struct(sname) => {
                if d.array.is_some() {
                    return Err(FrontendError::Unsupported {
                        pos: d.pos,
                        what: "array of structs".into(),
                    });
                }
                if d.init.is_some() {
                    return Err(FrontendError::Definition {
                        pos: d.pos,
                        msg: "struct variables take no initializer".into(),
                    });
                }
                self.declare_check(&d.name, d.pos)?;
                let fields = self.ck.structs[&sname].clone();
                let mut map = BTreeMap::new();
                let mut inits = Vec::new();
                for (fname, fty) in fields {
                    let id = LocalId(self.locals.len() as u32);
                    self.locals.push(TLocal {
                        name: format!("{}.{}", d.name, fname),
                        ty: fty,
                        count: None,
                        is_const: d.ty.quals.is_const,
                        trad_only: true,
                        addressed: false,
                        slot: None,
                    });
                    map.insert(fname, VarRef::Local(id));
                    inits.push(TStmt::AssignVar {
                        var: VarRef::Local(id),
                        value: TExpr { ty: fty, pos: d.pos, kind: TExprKind::Imm(zero_imm(fty)) },
                    });
                }
                self.scopes
                    .last_mut()
                    .expect("scope")
                    .insert(d.name.clone(), Binding::Fields(sname, map));
                out.extend(inits);
                Ok(())
            }
        }
    }

    fn check_assign(
        &mut self,
        target: &Expr,
        op: Option<BinOp>,
        value: &Expr,
        pos: Pos,
    ) -> Result<TStmt> {
        // Compound `t op= v` re-checks the target as a read.
        let value_expr = match op {
            None => value.clone(),
            Some(op) => Expr {
                kind: ExprKind::Bin {
                    op,
                    lhs: Box::new(target.clone()),
                    rhs: Box::new(value.clone()),
                },
                pos,
            },
        };
        match &target.kind {
            ExprKind::Var(name) => {
                let var = self.resolve_scalar_var(name, target.pos)?;
                if self.var_is_const(var) {
                    return Err(FrontendError::AssignToConst {
                        pos,
                        name: self.var_name(var),
                    });
                }
                if self.var_is_array(var) {
                    return self.ty_err(pos, "cannot assign to a whole array");
                }
                let te = self.check_expr(&value_expr)?;
                let te = self.coerce(te, self.var_ty(var), pos)?;
                Ok(TStmt::AssignVar { var, value: te })
            }
            ExprKind::Index { base, index } => {
                let arr = self.resolve_scalar_var(base, target.pos)?;
                if !self.var_is_array(arr) {
                    return self.ty_err(target.pos, format!("`{base}` is not an array"));
                }
                if self.var_is_const(arr) {
                    return Err(FrontendError::AssignToConst {
                        pos,
                        name: self.var_name(arr),
                    });
                }
                let index = self.check_index(index)?;
                let te = self.check_expr(&value_expr)?;
                let te = self.coerce(te, self.var_ty(arr), pos)?;
                Ok(TStmt::AssignIndex { arr, index, value: te })
            }
            ExprKind::Field { .. } => {
                let var = self.resolve_field(target)?;
                if self.var_is_const(var) {
                    return Err(FrontendError::AssignToConst {
                        pos,
                        name: self.var_name(var),
                    });
                }
                let te = self.check_expr(&value_expr)?;
                let te = self.coerce(te, self.var_ty(var), pos)?;
                Ok(TStmt::AssignVar { var, value: te })
            }
            ExprKind::Deref(ptr) => {
                let tp = self.check_expr(ptr)?;
                let ValTy::Ptr(pointee) = tp.ty else {
                    return self.ty_err(ptr.pos, format!("cannot deref `{}`", tp.ty.name()));
                };
                let te = self.check_expr(&value_expr)?;
                let pt = pointee_valty(pointee);
                let te = self.coerce(te, pt, pos)?;
                Ok(TStmt::AssignDeref { ptr: tp, pointee, value: te })
            }
            _ => self.ty_err(pos, "assignment target is not an lvalue"),
        }
    }

    fn resolve_scalar_var(&self, name: &str, pos: Pos) -> Result<VarRef> {
        match self.lookup(name) {
            Some(Binding::Scalar(r)) => Ok(*r),
            Some(Binding::Fields(sname, _)) => Err(FrontendError::NonSdtArithmetic {
                pos,
                what: format!("struct {sname} value `{name}` used directly"),
            }),
            None => Err(FrontendError::Undeclared { pos, name: name.to_string() }),
        }
    }

    fn resolve_field(&self, e: &Expr) -> Result<VarRef> {
        let ExprKind::Field { base, field } = &e.kind else { unreachable!() };
        match self.lookup(base) {
            Some(Binding::Fields(sname, map)) => match map.get(field) {
                Some(r) => Ok(*r),
                None => Err(FrontendError::Type {
                    pos: e.pos,
                    msg: format!("struct {sname} has no field `{field}`"),
                }),
            },
            Some(Binding::Scalar(_)) => Err(FrontendError::Type {
                pos: e.pos,
                msg: format!("`{base}` is not a struct variable"),
            }),
            None => Err(FrontendError::Undeclared { pos: e.pos, name: base.clone() }),
        }
    }

    /// Indexes are int; char widens, anything else is an error.
    fn check_index(&mut self, e: &Expr) -> Result<TExpr> {
        let te = self.check_expr(e)?;
        match te.ty {
            ValTy::Int => Ok(te),
            ValTy::Char => self.coerce(te, ValTy::Int, e.pos),
            other => self.ty_err(
                e.pos,
                format!("array index must be int or char, found `{}`", other.name()),
            ),
        }
    }

    /// Conditions are any numeric or pointer value, tested nonzero.
    fn check_cond(&mut self, e: &Expr) -> Result<TExpr> {
        let te = self.check_expr(e)?;
        if te.ty.is_numeric() || matches!(te.ty, ValTy::Ptr(_)) {
            Ok(te)
        } else {
            self.ty_err(e.pos, format!("condition has type `{}`", te.ty.name()))
        }
    }

    /// Convert `e` to `to`, inserting chain steps; errors on narrowing.
    fn coerce(&self, e: TExpr, to: ValTy, pos: Pos) -> Result<TExpr> {
        if e.ty == to {
            return Ok(e);
        }
        if let Some(fitted) = fit_literal(&e, to) {
            return Ok(fitted);
        }
        match (e.ty.sdt(), to.sdt()) {
            (Some(from), Some(tok)) => match widen_steps(from, tok) {
                Some(steps) => {
                    let mut cur = e;
                    for step in steps {
                        cur = TExpr {
                            ty: ValTy::from_sdt(step),
                            pos,
                            kind: TExprKind::Convert(Box::new(cur)),
                        };
                    }
                    Ok(cur)
                }
                None => self.ty_err(
                    pos,
                    format!("no conversion from `{}` to `{}`", e.ty.name(), to.name()),
                ),
            },
            _ => {
                // Integer widening onto the traditional side.
                if to == ValTy::Long && e.ty.is_integer() {
                    return Ok(TExpr { ty: ValTy::Long, pos, kind: TExprKind::Convert(Box::new(e)) });
                }
                self.ty_err(
                    pos,
                    format!("no conversion from `{}` to `{}`", e.ty.name(), to.name()),
                )
            }
        }
    }

    fn check_expr(&mut self, e: &Expr) -> Result<TExpr> {
        let pos = e.pos;
        match &e.kind {
            ExprKind::IntLit(v) => {
                let v32 = i32::try_from(*v).map_err(|_| FrontendError::Type {
                    pos,
                    msg: format!("integer literal {v} out of range"),
                })?;
                Ok(TExpr { ty: ValTy::Int, pos, kind: TExprKind::Imm(Imm::Int(v32)) })
            }
            ExprKind::LongLit(v) => {
                Ok(TExpr { ty: ValTy::Long, pos, kind: TExprKind::Imm(Imm::Long(*v)) })
            }
            ExprKind::FloatLit(v) => {
                Ok(TExpr { ty: ValTy::Float, pos, kind: TExprKind::Imm(Imm::Float(*v)) })
            }
            ExprKind::DoubleLit(v) => {
                Ok(TExpr { ty: ValTy::Double, pos, kind: TExprKind::Imm(Imm::Double(*v)) })
            }
            ExprKind::CharLit(v) => {
                Ok(TExpr { ty: ValTy::Char, pos, kind: TExprKind::Imm(Imm::Char(*v)) })
            }
            ExprKind::Var(name) => {
                if let Some(v) = self.ck.consts.get(name) {
                    if self.lookup(name).is_none() {
                        return Ok(TExpr {
                            ty: ValTy::Long,
                            pos,
                            kind: TExprKind::Imm(Imm::Long(*v)),
                        });
                    }
                }
                let var = self.resolve_scalar_var(name, pos)?;
                if self.var_is_array(var) {
                    return self.ty_err(
                        pos,
                        format!("array `{name}` used without an index"),
                    );
                }
                Ok(TExpr { ty: self.var_ty(var), pos, kind: TExprKind::Read(var) })
            }
            ExprKind::Index { base, index } => {
                let arr = self.resolve_scalar_var(base, pos)?;
                if !self.var_is_array(arr) {
                    return self.ty_err(pos, format!("`{base}` is not an array"));
                }
                let index = Box::new(self.check_index(index)?);
                Ok(TExpr {
                    ty: self.var_ty(arr),
                    pos,
                    kind: TExprKind::ReadIndex { arr, index },
                })
            }
            ExprKind::Field { .. } => {
                let var = self.resolve_field(e)?;
                Ok(TExpr { ty: self.var_ty(var), pos, kind: TExprKind::Read(var) })
            }
            ExprKind::Unary { op, expr } => self.check_unary(*op, expr, pos),
            ExprKind::Bin { op, lhs, rhs } => self.check_bin(*op, lhs, rhs, pos),
            ExprKind::Call { name, args } => {
                let Some(fi) = self.ck.sigs.iter().position(|s| &s.name == name) else {
                    return Err(FrontendError::Undeclared { pos, name: name.clone() });
                };
                let sig = self.ck.sigs[fi].clone();
                if sig.params.len() != args.len() {
                    return Err(FrontendError::Arity {
                        pos,
                        name: name.clone(),
                        expected: sig.params.len(),
                        found: args.len(),
                    });
                }
                let mut targs = Vec::new();
                for (a, pty) in args.iter().zip(&sig.params) {
                    let ta = self.check_expr(a)?;
                    targs.push(self.coerce(ta, *pty, a.pos)?);
                }
                Ok(TExpr { ty: sig.ret, pos, kind: TExprKind::Call { func: fi, args: targs } })
            }
            ExprKind::AddrOf(inner) => match &inner.kind {
                ExprKind::Var(name) => {
                    let var = self.resolve_scalar_var(name, inner.pos)?;
                    if self.var_is_array(var) {
                        return self.ty_err(
                            inner.pos,
                            "take the address of an element, not the array",
                        );
                    }
                    if self.var_trad(var) {
                        return Err(FrontendError::Unsupported {
                            pos: inner.pos,
                            what: "address of a struct field".into(),
                        });
                    }
                    let Some(s) = self.var_ty(var).scalar() else {
                        return self.ty_err(inner.pos, "cannot take this address");
                    };
                    if matches!(self.var_ty(var), ValTy::Ptr(_)) {
                        return Err(FrontendError::Unsupported {
                            pos: inner.pos,
                            what: "pointer to pointer".into(),
                        });
                    }
                    self.mark_addressed(var);
                    Ok(TExpr { ty: ValTy::Ptr(s), pos, kind: TExprKind::AddrOfVar(var) })
                }
                ExprKind::Index { base, index } => {
                    let arr = self.resolve_scalar_var(base, inner.pos)?;
                    if !self.var_is_array(arr) {
                        return self.ty_err(inner.pos, format!("`{base}` is not an array"));
                    }
                    let s = self.var_ty(arr).scalar().expect("array of scalars");
                    let index = Box::new(self.check_index(index)?);
                    Ok(TExpr {
                        ty: ValTy::Ptr(s),
                        pos,
                        kind: TExprKind::AddrOfIndex { arr, index },
                    })
                }
                _ => Err(FrontendError::Unsupported {
                    pos,
                    what: "address of this expression".into(),
                }),
            },
            ExprKind::Deref(inner) => {
                let tp = self.check_expr(inner)?;
                let ValTy::Ptr(pointee) = tp.ty else {
                    return self.ty_err(pos, format!("cannot deref `{}`", tp.ty.name()));
                };
                Ok(TExpr {
                    ty: pointee_valty(pointee),
                    pos,
                    kind: TExprKind::ReadDeref { ptr: Box::new(tp), pointee },
                })
            }
            ExprKind::New { elem, count } => {
                let dt = DeclType { quals: Quals::default(), name: elem.clone(), pointer: false };
                let ty = self.ck.resolve_val(&dt, pos, "allocation")?;
                let Some(s) = ty.scalar() else {
                    return self.ty_err(pos, "cannot allocate void");
                };
                if matches!(ty, ValTy::Ptr(_)) {
                    return Err(FrontendError::Unsupported {
                        pos,
                        what: "allocation of pointers".into(),
                    });
                }
                let tc = self.check_expr(count)?;
                let tc = match tc.ty {
                    ValTy::Int => tc,
                    ValTy::Char => self.coerce(tc, ValTy::Int, pos)?,
                    other => {
                        return self.ty_err(
                            pos,
                            format!("allocation count must be int, found `{}`", other.name()),
                        )
                    }
                };
                Ok(TExpr {
                    ty: ValTy::Int,
                    pos,
                    kind: TExprKind::New { elem: s, count: Box::new(tc) },
                })
            }
        }
    }

    fn check_unary(&mut self, op: UnOp, expr: &Expr, pos: Pos) -> Result<TExpr> {
        let te = self.check_expr(expr)?;
        if te.ty == ValTy::Void {
            return Err(FrontendError::NonSdtArithmetic { pos, what: "void value".into() });
        }
        match op {
            UnOp::Neg => {
                if !te.ty.is_numeric() {
                    return self.ty_err(pos, format!("cannot negate `{}`", te.ty.name()));
                }
                if let TExprKind::Imm(imm) = &te.kind {
                    // Fold negation of literals so `-5` stays one Imm.
                    let folded = match *imm {
                        Imm::Int(v) => Imm::Int(v.wrapping_neg()),
                        Imm::Long(v) => Imm::Long(v.wrapping_neg()),
                        Imm::Float(v) => Imm::Float(-v),
                        Imm::Double(v) => Imm::Double(-v),
                        Imm::Char(v) => Imm::Char(v.wrapping_neg()),
                    };
                    return Ok(TExpr { ty: te.ty, pos, kind: TExprKind::Imm(folded) });
                }
                let zero = TExpr { ty: te.ty, pos, kind: TExprKind::Imm(zero_imm(te.ty)) };
                Ok(TExpr {
                    ty: te.ty,
                    pos,
                    kind: TExprKind::Bin {
                        op: BinOp::Sub,
                        lhs: Box::new(zero),
                        rhs: Box::new(te),
                    },
                })
            }
            UnOp::Not => {
                // `!x` is `x == 0`; a negated comparison flips its
                // predicate instead.
                if let TExprKind::Cmp { pred, cmp_ty, lhs, rhs } = te.kind {
                    let flipped = match pred {
                        BinOp::Eq => BinOp::Ne,
                        BinOp::Ne => BinOp::Eq,
                        BinOp::Lt => BinOp::Ge,
                        BinOp::Ge => BinOp::Lt,
                        BinOp::Le => BinOp::Gt,
                        BinOp::Gt => BinOp::Le,
                        _ => unreachable!("comparison predicate"),
                    };
                    return Ok(TExpr {
                        ty: ValTy::Int,
                        pos,
                        kind: TExprKind::Cmp { pred: flipped, cmp_ty, lhs, rhs },
                    });
                }
                if !(te.ty.is_numeric() || matches!(te.ty, ValTy::Ptr(_))) {
                    return self.ty_err(pos, format!("cannot apply `!` to `{}`", te.ty.name()));
                }
                let zero = TExpr { ty: te.ty, pos, kind: TExprKind::Imm(zero_imm(te.ty)) };
                Ok(TExpr {
                    ty: ValTy::Int,
                    pos,
                    kind: TExprKind::Cmp {
                        pred: BinOp::Eq,
                        cmp_ty: te.ty,
                        lhs: Box::new(te),
                        rhs: Box::new(zero),
                    },
                })
            }
            UnOp::BitNot => {
                if !te.ty.is_integer() {
                    return self.ty_err(pos, format!("cannot apply `~` to `{}`", te.ty.name()));
                }
                // `~x` is `xnor(x, 0)`, which both lanes implement.
                let zero = TExpr { ty: te.ty, pos, kind: TExprKind::Imm(zero_imm(te.ty)) };
                Ok(TExpr {
                    ty: te.ty,
                    pos,
                    kind: TExprKind::Bin {
                        op: BinOp::BitXnor,
                        lhs: Box::new(te),
                        rhs: Box::new(zero),
                    },
                })
            }
        }
    }

    fn check_bin(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr, pos: Pos) -> Result<TExpr> {
        if op.is_logical() {
            let l = self.normalize_bool(lhs)?;
            let r = self.normalize_bool(rhs)?;
            let bit = if op == BinOp::LogAnd { BinOp::BitAnd } else { BinOp::BitOr };
            return Ok(TExpr {
                ty: ValTy::Int,
                pos,
                kind: TExprKind::Bin { op: bit, lhs: Box::new(l), rhs: Box::new(r) },
            });
        }
        let mut l = self.check_expr(lhs)?;
        let mut r = self.check_expr(rhs)?;
        for side in [&l, &r] {
            if side.ty == ValTy::Void {
                return Err(FrontendError::NonSdtArithmetic { pos, what: "void value".into() });
            }
        }
        // One-sided literals adopt the other operand's type when exact.
        if matches!(l.kind, TExprKind::Imm(_)) && !matches!(r.kind, TExprKind::Imm(_)) {
            if let Some(f) = fit_literal(&l, r.ty) {
                l = f;
            }
        } else if matches!(r.kind, TExprKind::Imm(_)) && !matches!(l.kind, TExprKind::Imm(_)) {
            if let Some(f) = fit_literal(&r, l.ty) {
                r = f;
            }
        } else if matches!(l.kind, TExprKind::Imm(_)) && matches!(r.kind, TExprKind::Imm(_)) {
            if let Some(f) = fit_literal(&r, l.ty) {
                r = f;
            } else if let Some(f) = fit_literal(&l, r.ty) {
                l = f;
            }
        }
        if op.is_comparison() {
            return self.finish_cmp(op, l, r, pos);
        }
        self.finish_arith(op, l, r, pos)
    }

    /// Result of a comparison chain: already a 0/1 int.
    fn normalize_bool(&mut self, e: &Expr) -> Result<TExpr> {
        let te = self.check_expr(e)?;
        if matches!(te.kind, TExprKind::Cmp { .. }) {
            return Ok(te);
        }
        if !(te.ty.is_numeric() || matches!(te.ty, ValTy::Ptr(_))) {
            return self.ty_err(e.pos, format!("cannot test `{}`", te.ty.name()));
        }
        let zero = TExpr { ty: te.ty, pos: e.pos, kind: TExprKind::Imm(zero_imm(te.ty)) };
        Ok(TExpr {
            ty: ValTy::Int,
            pos: e.pos,
            kind: TExprKind::Cmp {
                pred: BinOp::Ne,
                cmp_ty: te.ty,
                lhs: Box::new(te),
                rhs: Box::new(zero),
            },
        })
    }

    fn finish_cmp(&self, pred: BinOp, l: TExpr, r: TExpr, pos: Pos) -> Result<TExpr> {
        let cmp_ty = self.common_type(&l, &r, pos, "compare")?;
        let (l, r) = match cmp_ty {
            ValTy::Long | ValTy::Ptr(_) => {
                // Traditional comparison converts the right side to the
                // left's type, so only the left needs to be exact.
                let l = if l.ty != cmp_ty && l.ty.is_integer() {
                    self.coerce(l, ValTy::Long, pos)?
                } else {
                    l
                };
                (l, r)
            }
            _ => (self.coerce(l, cmp_ty, pos)?, self.coerce(r, cmp_ty, pos)?),
        };
        Ok(TExpr {
            ty: ValTy::Int,
            pos,
            kind: TExprKind::Cmp { pred, cmp_ty, lhs: Box::new(l), rhs: Box::new(r) },
        })
    }

    fn finish_arith(&self, op: BinOp, l: TExpr, r: TExpr, pos: Pos) -> Result<TExpr> {
        // Pointer arithmetic: word-granular adds and subs.
        if let ValTy::Ptr(s) = l.ty {
            return match (op, r.ty) {
                (BinOp::Add | BinOp::Sub, t) if t.is_integer() => Ok(TExpr {
                    ty: ValTy::Ptr(s),
                    pos,
                    kind: TExprKind::Bin { op, lhs: Box::new(l), rhs: Box::new(r) },
                }),
                (BinOp::Sub, ValTy::Ptr(_)) => Ok(TExpr {
                    ty: ValTy::Long,
                    pos,
                    kind: TExprKind::Bin { op, lhs: Box::new(l), rhs: Box::new(r) },
                }),
                _ => self.ty_err(pos, "unsupported pointer arithmetic"),
            };
        }
        if matches!(r.ty, ValTy::Ptr(_)) {
            return match (op, l.ty) {
                (BinOp::Add, t) if t.is_integer() => Ok(TExpr {
                    ty: r.ty,
                    pos,
                    kind: TExprKind::Bin { op, lhs: Box::new(l), rhs: Box::new(r) },
                }),
                _ => self.ty_err(pos, "unsupported pointer arithmetic"),
            };
        }
        let common = self.common_type(&l, &r, pos, op.symbol())?;
        let integer_only = matches!(
            op,
            BinOp::Mod | BinOp::BitAnd | BinOp::BitOr | BinOp::BitXor | BinOp::BitXnor
        );
        if integer_only && !common.is_integer() {
            return self.ty_err(
                pos,
                format!("`{}` needs integer operands, found `{}`", op.symbol(), common.name()),
            );
        }
        // Char multiply, divide, and modulo promote to int: the char
        // lane has no such units.
        let result = if common == ValTy::Char
            && matches!(op, BinOp::Mul | BinOp::Div | BinOp::Mod)
        {
            ValTy::Int
        } else {
            common
        };
        let (l, r) = match result {
            ValTy::Long => (l, r),
            _ => (self.coerce(l, result, pos)?, self.coerce(r, result, pos)?),
        };
        Ok(TExpr {
            ty: result,
            pos,
            kind: TExprKind::Bin { op, lhs: Box::new(l), rhs: Box::new(r) },
        })
    }

    /// The promoted operand type for a mixed binary operation.
    fn common_type(&self, l: &TExpr, r: &TExpr, pos: Pos, what: &str) -> Result<ValTy> {
        if matches!(l.ty, ValTy::Ptr(_)) || matches!(r.ty, ValTy::Ptr(_)) {
            // Pointer comparisons happen in address space.
            if l.ty == r.ty {
                return Ok(ValTy::Long);
            }
            return self.ty_err(pos, format!("cannot {what} `{}` and `{}`", l.ty.name(), r.ty.name()));
        }
        match (l.ty, r.ty) {
            (a, b) if a == b => Ok(a),
            (ValTy::Long, b) if b.is_integer() => Ok(ValTy::Long),
            (a, ValTy::Long) if a.is_integer() => Ok(ValTy::Long),
            (ValTy::Long, _) | (_, ValTy::Long) => self.ty_err(
                pos,
                "long does not mix with floating types; convert through int first",
            ),
            (a, b) => match (a.sdt(), b.sdt()) {
                (Some(x), Some(y)) => Ok(ValTy::from_sdt(x.max(y))),
                _ => self.ty_err(
                    pos,
                    format!("cannot {what} `{}` and `{}`", a.name(), b.name()),
                ),
            },
        }
    }
}

fn pointee_valty(s: Scalar) -> ValTy {
    match s {
        Scalar::Int => ValTy::Int,
        Scalar::Float => ValTy::Float,
        Scalar::Double => ValTy::Double,
        Scalar::Long => ValTy::Long,
        Scalar::Char => ValTy::Char,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    fn check_src(src: &str) -> Result<TypedProgram> {
        check(&parse(src).expect("parses"))
    }

    fn expect_ok(src: &str) -> TypedProgram {
        match check_src(src) {
            Ok(p) => p,
            Err(e) => panic!("expected well-typed program, got: {e}"),
        }
    }

    #[test]
    fn mixed_arithmetic_inserts_explicit_widenings() {
        let p = expect_ok("double d; int i;\nvoid main() { d = d + i; }");
        let main = &p.funcs[p.main];
        let TStmt::AssignVar { value, .. } = &main.body[0] else {
            panic!("expected assignment");
        };
        assert_eq!(value.ty, ValTy::Double);
        let TExprKind::Bin { op: BinOp::Add, rhs, .. } = &value.kind else {
            panic!("expected add, got {:?}", value.kind);
        };
        let TExprKind::Convert(inner) = &rhs.kind else {
            panic!("expected conversion on the int side");
        };
        assert_eq!(rhs.ty, ValTy::Double);
        assert_eq!(inner.ty, ValTy::Int);
    }

    #[test]
    fn char_to_float_widens_through_int() {
        let p = expect_ok("float f; char c;\nvoid main() { f = f * c; }");
        let main = &p.funcs[p.main];
        let TStmt::AssignVar { value, .. } = &main.body[0] else {
            panic!("expected assignment");
        };
        let TExprKind::Bin { rhs, .. } = &value.kind else { panic!("expected mul") };
        let TExprKind::Convert(step1) = &rhs.kind else { panic!("outer step") };
        assert_eq!(rhs.ty, ValTy::Float);
        let TExprKind::Convert(step2) = &step1.kind else { panic!("inner step") };
        assert_eq!(step1.ty, ValTy::Int);
        assert_eq!(step2.ty, ValTy::Char);
    }

    #[test]
    fn int_literals_retype_exactly_or_fail() {
        expect_ok("float f = 16777216; void main() { }");
        assert!(matches!(
            check_src("float f = 16777217; void main() { }"),
            Err(FrontendError::Type { .. })
        ));
        expect_ok("char c = 255; void main() { }");
        assert!(matches!(
            check_src("char c = 256; void main() { }"),
            Err(FrontendError::Type { .. })
        ));
        expect_ok("double d = 3; void main() { }");
    }

    #[test]
    fn long_suffix_pins_the_literal() {
        expect_ok("long n = 5L; void main() { }");
        assert!(matches!(
            check_src("int n = 5L; void main() { }"),
            Err(FrontendError::Type { .. })
        ));
        // An unsuffixed literal adopts the long side instead.
        expect_ok("long n; void main() { n = n + 5; }");
    }

    #[test]
    fn fractional_literals_default_double_and_fit_float() {
        expect_ok("double d = 0.1; float f = 0.5; void main() { }");
        let p = expect_ok("float f = 2.5; void main() { }");
        assert_eq!(p.globals[0].init[0], Imm::Float(2.5));
    }

    #[test]
    fn long_never_mixes_with_floating_types() {
        let err = check_src("long n; float f;\nvoid main() { f = f + n; }").unwrap_err();
        let FrontendError::Type { msg, .. } = err else { panic!("expected type error") };
        assert!(msg.contains("convert through int"), "got: {msg}");
    }

    #[test]
    fn char_multiply_promotes_to_int() {
        let p = expect_ok("char a; char b; int c;\nvoid main() { c = a * b; }");
        let main = &p.funcs[p.main];
        let TStmt::AssignVar { value, .. } = &main.body[0] else { panic!() };
        assert_eq!(value.ty, ValTy::Int);
        // And the promoted product cannot narrow back silently.
        assert!(matches!(
            check_src("char a; char b; char c;\nvoid main() { c = a * b; }"),
            Err(FrontendError::Type { .. })
        ));
        // Additive char arithmetic stays in char.
        let p = expect_ok("char a; char b; char c;\nvoid main() { c = a + b; }");
        let TStmt::AssignVar { value, .. } = &p.funcs[p.main].body[0] else { panic!() };
        assert_eq!(value.ty, ValTy::Char);
    }

    #[test]
    fn struct_variables_expand_per_field() {
        let p = expect_ok(
            "struct Point { int x; float y; };\nstruct Point p;\nint q;\n\
             void main() { p.x = 3; p.y = 1.5; q = p.x; }",
        );
        let names: Vec<&str> = p.globals.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["p.x", "p.y", "q"]);
        assert!(p.globals[0].trad_only && p.globals[1].trad_only);
        assert!(!p.globals[2].trad_only);
    }

    #[test]
    fn enum_constants_are_long_literals() {
        let p = expect_ok("enum Tag { A, B = 5, C };\nlong t = C;\nvoid main() { t = A; }");
        assert_eq!(p.globals[0].init[0], Imm::Long(6));
        assert!(matches!(
            check_src("enum Tag { A, B };\nint t = 0;\nvoid main() { t = A; }"),
            Err(FrontendError::Type { .. })
        ));
    }

    #[test]
    fn const_assignment_is_rejected() {
        let err = check_src("const int k = 3;\nvoid main() { k = 4; }").unwrap_err();
        assert!(matches!(err, FrontendError::AssignToConst { .. }), "got: {err}");
    }

    #[test]
    fn undeclared_names_and_bad_arity_are_caught() {
        assert!(matches!(
            check_src("void main() { x = 1; }"),
            Err(FrontendError::Undeclared { .. })
        ));
        let err = check_src(
            "int f(int a) { return a; }\nint r;\nvoid main() { r = f(1, 2); }",
        )
        .unwrap_err();
        assert!(matches!(err, FrontendError::Arity { expected: 1, found: 2, .. }));
    }

    #[test]
    fn pointer_arithmetic_and_deref_type_check() {
        expect_ok(
            "long d;\nvoid main() {\n  int x = 5; int* p = &x;\n  *p = 7; p = p + 1;\n  \
             int* q = &x; d = p - q;\n}",
        );
        assert!(matches!(
            check_src("void main() { int x = 1; int* p = &x; p = p * 2; }"),
            Err(FrontendError::Type { .. })
        ));
    }

    #[test]
    fn array_indexes_must_be_int_like() {
        expect_ok("int a[4]; char c;\nvoid main() { a[c] = 1; }");
        assert!(matches!(
            check_src("int a[4]; long n;\nvoid main() { a[n] = 1; }"),
            Err(FrontendError::Type { .. })
        ));
        assert!(matches!(
            check_src("int a[4]; float f;\nvoid main() { a[f] = 1; }"),
            Err(FrontendError::Type { .. })
        ));
    }

    #[test]
    fn storage_layout_covers_globals_then_memory_locals() {
        let p = expect_ok(
            "int a[3]; double d;\nvoid main() { int xs[2]; int y = 1; xs[0] = y; }",
        );
        assert_eq!(p.globals[0].addr, 0);
        assert_eq!(p.globals[1].addr, 3);
        let main = &p.funcs[p.main];
        let xs = main.locals.iter().find(|l| l.name == "xs").unwrap();
        assert_eq!(xs.slot, Some(4));
        let y = main.locals.iter().find(|l| l.name == "y").unwrap();
        assert_eq!(y.slot, None);
        assert_eq!(p.mem_extent, 6);
    }

    #[test]
    fn main_is_required_with_no_parameters() {
        assert!(matches!(
            check_src("int f() { return 0; }"),
            Err(FrontendError::Definition { .. })
        ));
        assert!(matches!(
            check_src("void main(int argc) { }"),
            Err(FrontendError::Definition { .. })
        ));
    }

    #[test]
    fn logical_operators_normalize_operands() {
        let p = expect_ok("int r; int a; int b;\nvoid main() { r = a && b; }");
        let TStmt::AssignVar { value, .. } = &p.funcs[p.main].body[0] else { panic!() };
        let TExprKind::Bin { op: BinOp::BitAnd, lhs, rhs } = &value.kind else {
            panic!("expected bitwise and of normalized flags, got {:?}", value.kind)
        };
        for side in [lhs, rhs] {
            assert!(
                matches!(&side.kind, TExprKind::Cmp { pred: BinOp::Ne, .. }),
                "operand should be a zero test"
            );
        }
    }

    #[test]
    fn bitwise_not_desugars_to_xnor_with_zero() {
        let p = expect_ok("int r; int a;\nvoid main() { r = ~a; }");
        let TStmt::AssignVar { value, .. } = &p.funcs[p.main].body[0] else { panic!() };
        assert!(matches!(&value.kind, TExprKind::Bin { op: BinOp::BitXnor, .. }));
        assert!(matches!(
            check_src("float f; void main() { f = ~f; }"),
            Err(FrontendError::Type { .. })
        ));
    }

    #[test]
    fn not_operator_flips_comparison_predicates() {
        let p = expect_ok("int r; int a; int b;\nvoid main() { r = !(a < b); }");
        let TStmt::AssignVar { value, .. } = &p.funcs[p.main].body[0] else { panic!() };
        assert!(matches!(&value.kind, TExprKind::Cmp { pred: BinOp::Ge, .. }));
    }

    #[test]
    fn reserved_global_names_are_rejected() {
        assert!(matches!(
            check_src("int __tmp; void main() { }"),
            Err(FrontendError::Definition { .. })
        ));
    }
}
