//! Recursive-descent MiniC parser.
//!
//! Operator precedence follows C. Constructs that are valid C but
//! outside this language (goto, casts, switch, increments used as
//! values, multi-level pointers, ...) are rejected with
//! [`FrontendError::Unsupported`] rather than a generic syntax error.

use super::ast::*;
use super::lexer::{lex, Pos, Tok, Token};
use super::FrontendError;
use std::collections::BTreeSet;

type Result<T> = std::result::Result<T, FrontendError>;

/// C keywords this language recognizes only to reject clearly.
const RESERVED: &[&str] = &[
    "goto", "break", "continue", "switch", "case", "default", "do", "union", "sizeof", "extern",
    "volatile", "register", "signed", "short", "auto", "inline",
];

/// Parse a translation unit.
pub fn parse(source: &str) -> Result<Ast> {
    let toks = lex(source)?;
    let mut p = Parser { toks, at: 0, typedefs: BTreeSet::new() };
    p.parse_unit()
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    /// Typedef names seen so far; needed to tell declarations from
    /// expression statements.
    typedefs: BTreeSet<String>,
}

impl Parser {
    fn cur(&self) -> &Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.cur().tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.at + n).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.cur().pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.cur().tok.clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(FrontendError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn unsupported<T>(&self, what: impl Into<String>) -> Result<T> {
        Err(FrontendError::Unsupported { pos: self.pos(), what: what.into() })
    }

    fn is_punct(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Punct(p) if *p == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(k) if *k == s)
    }

    fn eat_punct(&mut self, s: &str) -> bool {
        if self.is_punct(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, s: &str) -> Result<()> {
        if self.eat_punct(s) {
            Ok(())
        } else {
            self.syntax(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.check_reserved(&name)?;
                self.bump();
                Ok(name)
            }
            other => self.syntax(format!("expected identifier, found {other}")),
        }
    }

    fn check_reserved(&self, name: &str) -> Result<()> {
        if RESERVED.contains(&name) {
            self.unsupported(format!("`{name}`"))
        } else {
            Ok(())
        }
    }

    /// Whether the cursor sits on the start of a type.
    fn type_starts_here(&self) -> bool {
        match self.peek() {
            Tok::Kw(k) => matches!(
                *k,
                "int" | "float" | "double" | "long" | "char" | "void" | "struct" | "enum"
                    | "static" | "const" | "unsigned"
            ),
            Tok::Ident(name) => self.typedefs.contains(name),
            _ => false,
        }
    }

    fn parse_unit(&mut self) -> Result<Ast> {
        let mut items = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            items.push(self.parse_item()?);
        }
        Ok(Ast { items })
    }

    fn parse_item(&mut self) -> Result<Item> {
        let pos = self.pos();
        if self.eat_kw("typedef") {
            let ty = self.parse_type()?;
            let name = self.expect_ident()?;
            self.expect_punct(";")?;
            self.typedefs.insert(name.clone());
            return Ok(Item::Typedef { ty, name, pos });
        }
        if self.is_kw("struct") && matches!(self.peek_at(2), Tok::Punct("{")) {
            return self.parse_struct_def();
        }
        if self.is_kw("enum") && matches!(self.peek_at(2), Tok::Punct("{")) {
            return self.parse_enum_def();
        }
        if !self.type_starts_here() {
            if let Tok::Ident(name) = self.peek() {
                self.check_reserved(&name.clone())?;
            }
            return self.syntax(format!("expected a declaration, found {}", self.peek()));
        }
        let ty = self.parse_type()?;
        let name = self.expect_ident()?;
        if self.is_punct("(") {
            self.parse_func(ty, name, pos).map(Item::Func)
        } else {
            self.parse_var_rest(ty, name, pos).map(Item::Global)
        }
    }

    fn parse_struct_def(&mut self) -> Result<Item> {
        let pos = self.pos();
        self.bump();
        let name = self.expect_ident()?;
        self.expect_punct("{")?;
        let mut fields = Vec::new();
        while !self.eat_punct("}") {
            let fty = self.parse_type()?;
            let fname = self.expect_ident()?;
            if self.is_punct("[") {
                return self.unsupported("array field inside a struct");
            }
            self.expect_punct(";")?;
            fields.push((fty, fname));
        }
        self.expect_punct(";")?;
        if fields.is_empty() {
            return self.syntax(format!("struct `{name}` has no fields"));
        }
        Ok(Item::StructDef { name, fields, pos })
    }

    fn parse_enum_def(&mut self) -> Result<Item> {
        let pos = self.pos();
        self.bump();
        let name = self.expect_ident()?;
        self.expect_punct("{")?;
        let mut variants = Vec::new();
        loop {
            let vname = self.expect_ident()?;
            let value = if self.eat_punct("=") {
                let vpos = self.pos();
                match self.bump() {
                    Tok::IntLit(v) => Some(v),
                    Tok::Punct("-") => match self.bump() {
                        Tok::IntLit(v) => Some(-v),
                        other => {
                            return Err(FrontendError::Syntax {
                                pos: vpos,
                                msg: format!("expected integer enum value, found {other}"),
                            })
                        }
                    },
                    other => {
                        return Err(FrontendError::Syntax {
                            pos: vpos,
                            msg: format!("expected integer enum value, found {other}"),
                        })
                    }
                }
            } else {
                None
            };
            variants.push((vname, value));
            if !self.eat_punct(",") {
                break;
            }
            if self.is_punct("}") {
                break;
            }
        }
        self.expect_punct("}")?;
        self.expect_punct(";")?;
        Ok(Item::EnumDef { name, variants, pos })
    }

    /// `quals* base-name *?` with at most one pointer level.
    fn parse_type(&mut self) -> Result<DeclType> {
        let mut quals = Quals::default();
        loop {
            if self.eat_kw("static") {
                quals.is_static = true;
            } else if self.eat_kw("const") {
                quals.is_const = true;
            } else if self.eat_kw("unsigned") {
                quals.is_unsigned = true;
            } else {
                break;
            }
        }
        let name = match self.peek().clone() {
            Tok::Kw("int") => {
                self.bump();
                TypeName::Int
            }
            Tok::Kw("float") => {
                self.bump();
                TypeName::Float
            }
            Tok::Kw("double") => {
                self.bump();
                TypeName::Double
            }
            Tok::Kw("long") => {
                self.bump();
                TypeName::Long
            }
            Tok::Kw("char") => {
                self.bump();
                TypeName::Char
            }
            Tok::Kw("void") => {
                self.bump();
                TypeName::Void
            }
            Tok::Kw("struct") => {
                self.bump();
                if self.is_punct("{") {
                    return self.unsupported("anonymous struct");
                }
                TypeName::Struct(self.expect_ident()?)
            }
            Tok::Kw("enum") => {
                self.bump();
                if self.is_punct("{") {
                    return self.unsupported("anonymous enum");
                }
                TypeName::Enum(self.expect_ident()?)
            }
            Tok::Ident(n) if self.typedefs.contains(&n) => {
                self.bump();
                TypeName::Alias(n)
            }
            // `unsigned x;` alone would be valid C; require a base name.
            other => return self.syntax(format!("expected a type name, found {other}")),
        };
        let pointer = self.eat_punct("*");
        if self.is_punct("*") {
            return self.unsupported("multi-level pointer");
        }
        Ok(DeclType { quals, name, pointer })
    }

    fn parse_func(&mut self, ret: DeclType, name: String, pos: Pos) -> Result<FuncDecl> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            if self.is_kw("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
                self.bump();
                self.bump();
            } else {
                loop {
                    let pty = self.parse_type()?;
                    let pname = self.expect_ident()?;
                    if self.is_punct("[") {
                        return self.unsupported("array parameter");
                    }
                    params.push((pty, pname));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(")")?;
            }
        }
        let body = self.parse_block()?;
        Ok(FuncDecl { ret, name, params, body, pos })
    }

    /// The rest of a variable declaration after `type name`.
    fn parse_var_rest(&mut self, ty: DeclType, name: String, pos: Pos) -> Result<VarDecl> {
        let array = if self.eat_punct("[") {
            let n = match self.bump() {
                Tok::IntLit(v) if v > 0 && v <= u32::MAX as i64 => v as u32,
                Tok::IntLit(v) => {
                    return Err(FrontendError::Syntax {
                        pos,
                        msg: format!("array length must be positive, got {v}"),
                    })
                }
                other => {
                    return Err(FrontendError::Syntax {
                        pos,
                        msg: format!("array length must be an integer literal, found {other}"),
                    })
                }
            };
            self.expect_punct("]")?;
            Some(n)
        } else {
            None
        };
        let init = if self.eat_punct("=") {
            if self.eat_punct("{") {
                let mut elems = Vec::new();
                loop {
                    elems.push(self.parse_expr()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                    if self.is_punct("}") {
                        break;
                    }
                }
                self.expect_punct("}")?;
                Some(Init::List(elems))
            } else {
                Some(Init::Expr(self.parse_expr()?))
            }
        } else {
            None
        };
        self.expect_punct(";")?;
        Ok(VarDecl { ty, name, array, init, pos })
    }

    fn parse_block(&mut self) -> Result<Block> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.syntax("unterminated block");
            }
            stmts.push(self.parse_stmt()?);
        }
        Ok(Block { stmts })
    }

    /// A block, or a single statement wrapped in one.
    fn parse_body(&mut self) -> Result<Block> {
        if self.is_punct("{") {
            self.parse_block()
        } else {
            Ok(Block { stmts: vec![self.parse_stmt()?] })
        }
    }

    fn parse_stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        if self.is_punct("{") {
            return Ok(Stmt { kind: StmtKind::Block(self.parse_block()?), pos });
        }
        if self.eat_kw("if") {
            self.expect_punct("(")?;
            let cond = self.parse_expr()?;
            self.expect_punct(")")?;
            let then_blk = self.parse_body()?;
            let else_blk = if self.eat_kw("else") { Some(self.parse_body()?) } else { None };
            return Ok(Stmt { kind: StmtKind::If { cond, then_blk, else_blk }, pos });
        }
        if self.eat_kw("while") {
            self.expect_punct("(")?;
            let cond = self.parse_expr()?;
            self.expect_punct(")")?;
            let body = self.parse_body()?;
            return Ok(Stmt { kind: StmtKind::While { cond, body }, pos });
        }
        if self.eat_kw("for") {
            self.expect_punct("(")?;
            let init = if self.is_punct(";") {
                self.bump();
                None
            } else if self.type_starts_here() {
                let dpos = self.pos();
                let ty = self.parse_type()?;
                let name = self.expect_ident()?;
                let decl = self.parse_var_rest(ty, name, dpos)?;
                Some(Box::new(Stmt { kind: StmtKind::Decl(decl), pos: dpos }))
            } else {
                let s = self.parse_simple_stmt()?;
                self.expect_punct(";")?;
                Some(Box::new(s))
            };
            let cond = self.parse_expr()?;
            self.expect_punct(";")?;
            let step = if self.is_punct(")") {
                None
            } else {
                Some(Box::new(self.parse_simple_stmt()?))
            };
            self.expect_punct(")")?;
            let body = self.parse_body()?;
            return Ok(Stmt { kind: StmtKind::For { init, cond, step, body }, pos });
        }
        if self.eat_kw("return") {
            let value = if self.is_punct(";") { None } else { Some(self.parse_expr()?) };
            self.expect_punct(";")?;
            return Ok(Stmt { kind: StmtKind::Return(value), pos });
        }
        if self.eat_kw("delete") {
            let h = self.parse_expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt { kind: StmtKind::Delete(h), pos });
        }
        if self.is_kw("else") {
            return self.syntax("`else` without a matching `if`");
        }
        if self.type_starts_here() {
            let ty = self.parse_type()?;
            let name = self.expect_ident()?;
            let decl = self.parse_var_rest(ty, name, pos)?;
            return Ok(Stmt { kind: StmtKind::Decl(decl), pos });
        }
        if let Tok::Ident(name) = self.peek() {
            self.check_reserved(&name.clone())?;
        }
        let s = self.parse_simple_stmt()?;
        self.expect_punct(";")?;
        Ok(s)
    }

    /// An assignment, `++`/`--`, or bare expression, without the `;`.
    fn parse_simple_stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        if self.is_punct("++") || self.is_punct("--") {
            let op = if self.bump() == Tok::Punct("++") { BinOp::Add } else { BinOp::Sub };
            let target = self.parse_unary()?;
            return self.incdec(target, op, pos);
        }
        let lhs = self.parse_expr()?;
        if self.is_punct("++") || self.is_punct("--") {
            let op = if self.bump() == Tok::Punct("++") { BinOp::Add } else { BinOp::Sub };
            return self.incdec(lhs, op, pos);
        }
        let compound = [
            ("=", None),
            ("+=", Some(BinOp::Add)),
            ("-=", Some(BinOp::Sub)),
            ("*=", Some(BinOp::Mul)),
            ("/=", Some(BinOp::Div)),
            ("%=", Some(BinOp::Mod)),
        ];
        for (sym, op) in compound {
            if self.is_punct(sym) {
                self.bump();
                if !lhs.is_lvalue() {
                    return Err(FrontendError::Syntax {
                        pos,
                        msg: "assignment target is not an lvalue".into(),
                    });
                }
                let value = self.parse_expr()?;
                return Ok(Stmt { kind: StmtKind::Assign { target: lhs, op, value }, pos });
            }
        }
        if self.is_punct("<<=") || self.is_punct(">>=") {
            return self.unsupported("shift assignment");
        }
        Ok(Stmt { kind: StmtKind::ExprStmt(lhs), pos })
    }

    fn incdec(&self, target: Expr, op: BinOp, pos: Pos) -> Result<Stmt> {
        if !target.is_lvalue() {
            return Err(FrontendError::Syntax {
                pos,
                msg: "increment target is not an lvalue".into(),
            });
        }
        let one = Expr { kind: ExprKind::IntLit(1), pos };
        Ok(Stmt { kind: StmtKind::Assign { target, op: Some(op), value: one }, pos })
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        self.parse_bin(0)
    }

    /// Precedence climbing; higher binds tighter.
    fn bin_prec(&self) -> Option<(BinOp, u8)> {
        let Tok::Punct(p) = self.peek() else { return None };
        Some(match *p {
            "*" => (BinOp::Mul, 10),
            "/" => (BinOp::Div, 10),
            "%" => (BinOp::Mod, 10),
            "+" => (BinOp::Add, 9),
            "-" => (BinOp::Sub, 9),
            "<" => (BinOp::Lt, 7),
            "<=" => (BinOp::Le, 7),
            ">" => (BinOp::Gt, 7),
            ">=" => (BinOp::Ge, 7),
            "==" => (BinOp::Eq, 6),
            "!=" => (BinOp::Ne, 6),
            "&" => (BinOp::BitAnd, 5),
            "^" => (BinOp::BitXor, 4),
            "|" => (BinOp::BitOr, 3),
            "&&" => (BinOp::LogAnd, 2),
            "||" => (BinOp::LogOr, 1),
            _ => return None,
        })
    }

    fn parse_bin(&mut self, min_prec: u8) -> Result<Expr> {
        if self.is_punct("<<") || self.is_punct(">>") {
            return self.unsupported("shift operator");
        }
        let mut lhs = self.parse_unary()?;
        loop {
            if self.is_punct("<<") || self.is_punct(">>") {
                return self.unsupported("shift operator");
            }
            if self.is_punct("?") {
                return self.unsupported("conditional operator");
            }
            let Some((op, prec)) = self.bin_prec() else { break };
            if prec < min_prec {
                break;
            }
            let pos = self.pos();
            self.bump();
            let rhs = self.parse_bin(prec + 1)?;
            lhs = Expr {
                kind: ExprKind::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                pos,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        if self.is_punct("++") || self.is_punct("--") {
            return self.unsupported("increment used as a value");
        }
        for (sym, op) in [("-", UnOp::Neg), ("!", UnOp::Not), ("~", UnOp::BitNot)] {
            if self.is_punct(sym) {
                self.bump();
                let expr = Box::new(self.parse_unary()?);
                return Ok(Expr { kind: ExprKind::Unary { op, expr }, pos });
            }
        }
        if self.eat_punct("&") {
            let inner = self.parse_unary()?;
            if !inner.is_lvalue() {
                return Err(FrontendError::Syntax {
                    pos,
                    msg: "`&` needs a variable, array element, or field".into(),
                });
            }
            return Ok(Expr { kind: ExprKind::AddrOf(Box::new(inner)), pos });
        }
        if self.eat_punct("*") {
            let inner = self.parse_unary()?;
            return Ok(Expr { kind: ExprKind::Deref(Box::new(inner)), pos });
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::IntLit(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::IntLit(v), pos })
            }
            Tok::LongLit(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::LongLit(v), pos })
            }
            Tok::FloatLit(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::FloatLit(v), pos })
            }
            Tok::DoubleLit(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::DoubleLit(v), pos })
            }
            Tok::CharLit(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::CharLit(v), pos })
            }
            Tok::Punct("(") => {
                self.bump();
                if self.type_starts_here() {
                    return self.unsupported("cast expression");
                }
                let e = self.parse_expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Kw("new") => {
                self.bump();
                let elem = self.parse_type()?;
                if elem.pointer || elem.quals != Quals::default() {
                    return self.unsupported("qualified or pointer element type in `new`");
                }
                self.expect_punct("[")?;
                let count = Box::new(self.parse_expr()?);
                self.expect_punct("]")?;
                Ok(Expr { kind: ExprKind::New { elem: elem.name, count }, pos })
            }
            Tok::Ident(name) => {
                self.check_reserved(&name)?;
                self.bump();
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.eat_punct(")") {
                        loop {
                            args.push(self.parse_expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                        self.expect_punct(")")?;
                    }
                    return Ok(Expr { kind: ExprKind::Call { name, args }, pos });
                }
                if self.eat_punct("[") {
                    let index = Box::new(self.parse_expr()?);
                    self.expect_punct("]")?;
                    if self.is_punct("[") {
                        return self.unsupported("multi-dimensional array access");
                    }
                    return Ok(Expr { kind: ExprKind::Index { base: name, index }, pos });
                }
                if self.eat_punct(".") {
                    let field = self.expect_ident()?;
                    if self.is_punct(".") {
                        return self.unsupported("nested field access");
                    }
                    return Ok(Expr { kind: ExprKind::Field { base: name, field }, pos });
                }
                if self.is_punct("->") {
                    return self.unsupported("pointer field access (`->`)");
                }
                Ok(Expr { kind: ExprKind::Var(name), pos })
            }
            other => self.syntax(format!("expected an expression, found {other}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> Ast {
        parse(src).unwrap()
    }

    fn body(src: &str) -> Vec<Stmt> {
        let ast = parse_ok(src);
        for item in ast.items {
            if let Item::Func(f) = item {
                if f.name == "main" {
                    return f.body.stmts;
                }
            }
        }
        panic!("no main in fixture");
    }

    #[test]
    fn parses_globals_functions_and_composites() {
        let ast = parse_ok(
            "struct Point { int x; int y; };\n\
             enum Color { RED, GREEN = 5, BLUE };\n\
             typedef float real;\n\
             int limit = 10;\n\
             real scale(real v) { return v * 2.0f; }\n\
             void main() { }\n",
        );
        assert_eq!(ast.items.len(), 6);
        assert!(matches!(&ast.items[0], Item::StructDef { name, fields, .. }
            if name == "Point" && fields.len() == 2));
        assert!(matches!(&ast.items[1], Item::EnumDef { variants, .. }
            if variants[1] == ("GREEN".to_string(), Some(5))));
        assert!(matches!(&ast.items[2], Item::Typedef { name, .. } if name == "real"));
        assert!(matches!(&ast.items[4], Item::Func(f) if f.params.len() == 1));
    }

    #[test]
    fn for_loop_with_decl_and_increment() {
        let stmts = body("void main() { int a[8]; for (int i = 0; i < 8; i++) { a[i] = i; } }");
        let StmtKind::For { init, cond, step, .. } = &stmts[1].kind else {
            panic!("expected for, got {:?}", stmts[1]);
        };
        assert!(matches!(&init.as_ref().unwrap().kind, StmtKind::Decl(d) if d.name == "i"));
        assert!(matches!(&cond.kind, ExprKind::Bin { op: BinOp::Lt, .. }));
        assert!(matches!(
            &step.as_ref().unwrap().kind,
            StmtKind::Assign { op: Some(BinOp::Add), .. }
        ));
    }

    #[test]
    fn precedence_mul_binds_tighter_than_add() {
        let stmts = body("void main() { int x; x = 1 + 2 * 3; }");
        let StmtKind::Assign { value, .. } = &stmts[1].kind else { panic!() };
        let ExprKind::Bin { op: BinOp::Add, rhs, .. } = &value.kind else {
            panic!("expected + at root, got {value:?}");
        };
        assert!(matches!(rhs.kind, ExprKind::Bin { op: BinOp::Mul, .. }));
    }

    #[test]
    fn comparison_binds_tighter_than_logic() {
        let stmts = body("void main() { int x; x = 1 < 2 && 3 == 3; }");
        let StmtKind::Assign { value, .. } = &stmts[1].kind else { panic!() };
        assert!(matches!(value.kind, ExprKind::Bin { op: BinOp::LogAnd, .. }));
    }

    #[test]
    fn goto_is_unsupported_not_a_syntax_error() {
        let err = parse("void main() { goto l; }").unwrap_err();
        assert!(matches!(err, FrontendError::Unsupported { .. }), "got {err:?}");
    }

    #[test]
    fn casts_and_shifts_are_unsupported() {
        for src in [
            "void main() { int x; x = (int)1.5; }",
            "void main() { int x; x = 1 << 2; }",
            "void main() { int x; x = x ? 1 : 2; }",
            "int** p;",
            "void main() { int x; x = x++ + 1; }",
        ] {
            let err = parse(src).unwrap_err();
            assert!(
                matches!(err, FrontendError::Unsupported { .. })
                    || matches!(err, FrontendError::Syntax { .. }),
                "{src}: {err:?}"
            );
        }
        assert!(matches!(
            parse("void main() { int x; x = (int)1.5; }").unwrap_err(),
            FrontendError::Unsupported { .. }
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("void main() {\n  int x = ;\n}").unwrap_err();
        let FrontendError::Syntax { pos, .. } = err else { panic!("got {err:?}") };
        assert_eq!(pos.line, 2);
    }

    #[test]
    fn new_and_delete_round_trip() {
        let stmts = body("void main() { int h; h = new float[16]; delete h; }");
        let StmtKind::Assign { value, .. } = &stmts[1].kind else { panic!() };
        assert!(matches!(&value.kind, ExprKind::New { elem: TypeName::Float, .. }));
        assert!(matches!(&stmts[2].kind, StmtKind::Delete(_)));
    }

    #[test]
    fn typedef_names_parse_as_types_in_statements() {
        let ast = parse_ok("typedef int myint;\nvoid main() { myint v = 3; }");
        let Item::Func(f) = &ast.items[1] else { panic!() };
        assert!(matches!(&f.body.stmts[0].kind, StmtKind::Decl(d)
            if d.ty.name == TypeName::Alias("myint".into())));
    }

    #[test]
    fn pointers_and_address_of_parse() {
        let stmts = body("void main() { int x; int* p; p = &x; *p = 4; x = *p + 1; }");
        assert!(matches!(&stmts[1].kind, StmtKind::Decl(d) if d.ty.pointer));
        assert!(matches!(&stmts[2].kind,
            StmtKind::Assign { value, .. } if matches!(value.kind, ExprKind::AddrOf(_))));
        assert!(matches!(&stmts[3].kind,
            StmtKind::Assign { target, .. } if matches!(target.kind, ExprKind::Deref(_))));
    }

    #[test]
    fn array_initializer_lists_parse() {
        let ast = parse_ok("int a[3] = {1, 2, 3};");
        let Item::Global(d) = &ast.items[0] else { panic!() };
        assert_eq!(d.array, Some(3));
        assert!(matches!(&d.init, Some(Init::List(es)) if es.len() == 3));
    }
}
