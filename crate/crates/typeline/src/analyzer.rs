//! Static source statistics and significant-datatype selection.
//!
//! Walks untyped syntax (no name checking needed, so it also digests
//! sources that would not typecheck) and counts declarations per base
//! type, operational features, and loop-weighted type occurrences.
//! Unit statistics aggregate into corpus averages, and the top-ranked
//! base scalar types become the significant datatypes that the typed
//! process lines are built around.
//!
//! Counting rules:
//!
//! * `type_counts` counts declarations: globals, locals, parameters,
//!   and struct fields, each under its spelled base type (a pointer to
//!   int counts as int; a declaration through an alias counts as
//!   typedef). A `typedef` item itself counts as typedef.
//! * `feature_counts`: loops are `for` + `while`; conditions are `if`
//!   plus one guard per loop; `static`/`const`/`unsigned` count
//!   qualifier occurrences on any spelled type; arrayOps counts index
//!   expressions.
//! * `loop_weighted_type_counts` counts declarations and resolved
//!   variable occurrences, each multiplied by weight^depth at its site
//!   (depth = loop nesting). A loop's init runs once and sits at the
//!   enclosing depth; its guard, step, and body sit one level deeper.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::ast::{
    Ast, Block, DeclType, Expr, ExprKind, Init, Item, Stmt, StmtKind, TypeName, VarDecl,
};

/// Base-type columns of the statistics table, in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseType {
    Int,
    Float,
    Double,
    Long,
    Char,
    Struct,
    Enum,
    Typedef,
}

impl BaseType {
    pub const ALL: [BaseType; 8] = [
        BaseType::Int,
        BaseType::Float,
        BaseType::Double,
        BaseType::Long,
        BaseType::Char,
        BaseType::Struct,
        BaseType::Enum,
        BaseType::Typedef,
    ];

    /// Base scalar types eligible for selection, in tie-break order:
    /// composites decompose into these and never rank themselves.
    pub const SELECTABLE: [BaseType; 5] =
        [BaseType::Int, BaseType::Float, BaseType::Double, BaseType::Char, BaseType::Long];

    pub fn label(self) -> &'static str {
        match self {
            BaseType::Int => "int",
            BaseType::Float => "float",
            BaseType::Double => "double",
            BaseType::Long => "long",
            BaseType::Char => "char",
            BaseType::Struct => "struct",
            BaseType::Enum => "enum",
            BaseType::Typedef => "typedef",
        }
    }
}

/// Feature columns of the statistics table, in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Loops,
    Conditions,
    Static,
    Const,
    Unsigned,
    ArrayOps,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Loops,
        Feature::Conditions,
        Feature::Static,
        Feature::Const,
        Feature::Unsigned,
        Feature::ArrayOps,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Feature::Loops => "loops",
            Feature::Conditions => "conditions",
            Feature::Static => "static",
            Feature::Const => "const",
            Feature::Unsigned => "unsigned",
            Feature::ArrayOps => "arrayOps",
        }
    }
}

/// Per-unit statistics; aggregated corpora reuse the same shape with
/// fractional means.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TypeStats {
    pub unit: String,
    pub type_counts: BTreeMap<BaseType, f64>,
    pub feature_counts: BTreeMap<Feature, f64>,
    pub loop_weighted_type_counts: BTreeMap<BaseType, f64>,
}

impl TypeStats {
    pub fn new(unit: impl Into<String>) -> TypeStats {
        TypeStats { unit: unit.into(), ..TypeStats::default() }
    }

    pub fn type_count(&self, t: BaseType) -> f64 {
        self.type_counts.get(&t).copied().unwrap_or(0.0)
    }

    pub fn feature_count(&self, f: Feature) -> f64 {
        self.feature_counts.get(&f).copied().unwrap_or(0.0)
    }

    pub fn weighted_count(&self, t: BaseType) -> f64 {
        self.loop_weighted_type_counts.get(&t).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("cannot aggregate an empty corpus")]
    EmptyCorpus,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {msg}")]
    Schema { row: usize, msg: String },
}

/// Count declarations, features, and loop-weighted occurrences over one
/// parsed unit. `loop_weight` multiplies per nesting level; 1 disables
/// weighting, the conventional default is 10.
pub fn collect_stats(ast: &Ast, loop_weight: f64) -> TypeStats {
    let mut w = Walker {
        stats: TypeStats::default(),
        weight: loop_weight,
        scopes: vec![BTreeMap::new()],
        depth: 0,
    };
    for item in &ast.items {
        match item {
            Item::Global(decl) => w.decl(decl),
            Item::Func(f) => {
                w.quals(&f.ret);
                w.scopes.push(BTreeMap::new());
                for (ty, name) in &f.params {
                    w.declare(ty, name);
                }
                w.block(&f.body);
                w.scopes.pop();
            }
            Item::StructDef { fields, .. } => {
                for (ty, name) in fields {
                    w.declare(ty, name);
                }
            }
            Item::EnumDef { .. } => {}
            Item::Typedef { ty, .. } => {
                w.quals(ty);
                w.bump_type(BaseType::Typedef, 1.0);
            }
        }
    }
    w.stats.unit = String::new();
    w.stats
}

struct Walker {
    stats: TypeStats,
    weight: f64,
    /// Innermost-last scopes mapping variable name to its base type.
    scopes: Vec<BTreeMap<String, BaseType>>,
    depth: u32,
}

impl Walker {
    fn multiplier(&self) -> f64 {
        self.weight.powi(self.depth as i32)
    }

    fn bump_type(&mut self, t: BaseType, n: f64) {
        *self.stats.type_counts.entry(t).or_insert(0.0) += n;
        *self.stats.loop_weighted_type_counts.entry(t).or_insert(0.0) += n * self.multiplier();
    }

    fn bump_feature(&mut self, f: Feature, n: f64) {
        *self.stats.feature_counts.entry(f).or_insert(0.0) += n;
    }

    fn quals(&mut self, ty: &DeclType) {
        if ty.quals.is_static {
            self.bump_feature(Feature::Static, 1.0);
        }
        if ty.quals.is_const {
            self.bump_feature(Feature::Const, 1.0);
        }
        if ty.quals.is_unsigned {
            self.bump_feature(Feature::Unsigned, 1.0);
        }
    }

    fn base_of(ty: &TypeName) -> Option<BaseType> {
        match ty {
            TypeName::Int => Some(BaseType::Int),
            TypeName::Float => Some(BaseType::Float),
            TypeName::Double => Some(BaseType::Double),
            TypeName::Long => Some(BaseType::Long),
            TypeName::Char => Some(BaseType::Char),
            TypeName::Void => None,
            TypeName::Struct(_) => Some(BaseType::Struct),
            TypeName::Enum(_) => Some(BaseType::Enum),
            TypeName::Alias(_) => Some(BaseType::Typedef),
        }
    }

    /// Record a named declaration: one type count plus a scope entry so
    /// later occurrences of the name resolve to the same base type.
    fn declare(&mut self, ty: &DeclType, name: &str) {
        self.quals(ty);
        if let Some(base) = Self::base_of(&ty.name) {
            self.bump_type(base, 1.0);
            self.scopes.last_mut().expect("scope").insert(name.to_string(), base);
        }
    }

    fn decl(&mut self, d: &VarDecl) {
        self.declare(&d.ty, &d.name);
        match &d.init {
            Some(Init::Expr(e)) => self.expr(e),
            Some(Init::List(es)) => es.iter().for_each(|e| self.expr(e)),
            None => {}
        }
    }

    /// A resolved occurrence of a declared name adds its weighted
    /// contribution without touching the raw declaration counts.
    fn touch(&mut self, name: &str) {
        let base = self.scopes.iter().rev().find_map(|s| s.get(name).copied());
        if let Some(base) = base {
            let m = self.multiplier();
            *self.stats.loop_weighted_type_counts.entry(base).or_insert(0.0) += m;
        }
    }

    fn block(&mut self, b: &Block) {
        self.scopes.push(BTreeMap::new());
        for s in &b.stmts {
            self.stmt(s);
        }
        self.scopes.pop();
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Decl(d) => self.decl(d),
            StmtKind::Assign { target, value, .. } => {
                self.expr(target);
                self.expr(value);
            }
            StmtKind::If { cond, then_blk, else_blk } => {
                self.bump_feature(Feature::Conditions, 1.0);
                self.expr(cond);
                self.block(then_blk);
                if let Some(e) = else_blk {
                    self.block(e);
                }
            }
            StmtKind::While { cond, body } => {
                self.bump_feature(Feature::Loops, 1.0);
                self.bump_feature(Feature::Conditions, 1.0);
                self.depth += 1;
                self.expr(cond);
                self.block(body);
                self.depth -= 1;
            }
            StmtKind::For { init, cond, step, body } => {
                self.bump_feature(Feature::Loops, 1.0);
                self.bump_feature(Feature::Conditions, 1.0);
                self.scopes.push(BTreeMap::new());
                if let Some(i) = init {
                    self.stmt(i);
                }
                self.depth += 1;
                self.expr(cond);
                if let Some(st) = step {
                    self.stmt(st);
                }
                self.block(body);
                self.depth -= 1;
                self.scopes.pop();
            }
            StmtKind::Return(v) => {
                if let Some(e) = v {
                    self.expr(e);
                }
            }
            StmtKind::Delete(e) | StmtKind::ExprStmt(e) => self.expr(e),
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::IntLit(_)
            | ExprKind::LongLit(_)
            | ExprKind::FloatLit(_)
            | ExprKind::DoubleLit(_)
            | ExprKind::CharLit(_) => {}
            ExprKind::Var(name) => self.touch(name),
            ExprKind::Index { base, index } => {
                self.bump_feature(Feature::ArrayOps, 1.0);
                self.touch(base);
                self.expr(index);
            }
            ExprKind::Field { base, .. } => self.touch(base),
            ExprKind::Unary { expr, .. } => self.expr(expr),
            ExprKind::Bin { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            ExprKind::Call { args, .. } => args.iter().for_each(|a| self.expr(a)),
            ExprKind::AddrOf(inner) | ExprKind::Deref(inner) => self.expr(inner),
            ExprKind::New { count, .. } => self.expr(count),
        }
    }
}

/// Arithmetic mean per key over a non-empty corpus.
pub fn aggregate(corpus: &[TypeStats]) -> Result<TypeStats, AnalyzerError> {
    if corpus.is_empty() {
        return Err(AnalyzerError::EmptyCorpus);
    }
    let n = corpus.len() as f64;
    let mut out = TypeStats::new("avg");
    for t in BaseType::ALL {
        let sum: f64 = corpus.iter().map(|s| s.type_count(t)).sum();
        out.type_counts.insert(t, sum / n);
        let wsum: f64 = corpus.iter().map(|s| s.weighted_count(t)).sum();
        out.loop_weighted_type_counts.insert(t, wsum / n);
    }
    for f in Feature::ALL {
        let sum: f64 = corpus.iter().map(|s| s.feature_count(f)).sum();
        out.feature_counts.insert(f, sum / n);
    }
    Ok(out)
}

/// Rank the base scalar types by score and return the top `k` in rank
/// order. Composite markers (struct/enum/typedef) never rank; ties
/// break int > float > double > char > long.
pub fn select_sdt(stats: &TypeStats, k: usize, use_loop_weighting: bool) -> Vec<BaseType> {
    let score = |t: BaseType| {
        if use_loop_weighting {
            stats.weighted_count(t)
        } else {
            stats.type_count(t)
        }
    };
    let mut ranked = BaseType::SELECTABLE.to_vec();
    // Stable sort keeps the tie-break order of SELECTABLE.
    ranked.sort_by(|&a, &b| score(b).partial_cmp(&score(a)).expect("finite scores"));
    ranked.truncate(k.min(ranked.len()));
    ranked
}

// ----- CSV interchange ------------------------------------------------------

const TYPE_HEADER: [&str; 9] =
    ["unit", "int", "float", "double", "long", "char", "struct", "enum", "typedef"];
const FEATURE_HEADER: [&str; 7] =
    ["unit", "loops", "conditions", "static", "const", "unsigned", "arrayOps"];

fn check_header(got: &csv::StringRecord, want: &[&str]) -> Result<(), AnalyzerError> {
    let got: Vec<&str> = got.iter().map(str::trim).collect();
    if got != want {
        return Err(AnalyzerError::Schema {
            row: 1,
            msg: format!("expected header `{}`, got `{}`", want.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_cell(rec: &csv::StringRecord, row: usize, col: usize) -> Result<f64, AnalyzerError> {
    let raw = rec.get(col).unwrap_or("").trim();
    raw.parse().map_err(|_| AnalyzerError::Schema {
        row,
        msg: format!("column {} is not a number: `{raw}`", col + 1),
    })
}

/// Read per-unit type counts. Loop-weighted counts default to the raw
/// counts, since the table format carries no weighting information.
pub fn read_type_csv(text: &str) -> Result<Vec<TypeStats>, AnalyzerError> {
    let mut rdr =
        csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(rdr.headers()?, &TYPE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != TYPE_HEADER.len() {
            return Err(AnalyzerError::Schema {
                row,
                msg: format!("expected {} columns, got {}", TYPE_HEADER.len(), rec.len()),
            });
        }
        let mut s = TypeStats::new(rec.get(0).unwrap_or(""));
        for (col, t) in BaseType::ALL.iter().enumerate() {
            let v = parse_cell(&rec, row, col + 1)?;
            s.type_counts.insert(*t, v);
            s.loop_weighted_type_counts.insert(*t, v);
        }
        out.push(s);
    }
    Ok(out)
}

/// Merge a feature table into already-read per-unit stats, by unit name.
pub fn attach_features(stats: &mut [TypeStats], text: &str) -> Result<(), AnalyzerError> {
    let mut rdr =
        csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(rdr.headers()?, &FEATURE_HEADER)?;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let unit = rec.get(0).unwrap_or("").to_string();
        let target = stats.iter_mut().find(|s| s.unit == unit).ok_or_else(|| {
            AnalyzerError::Schema { row, msg: format!("unknown unit `{unit}`") }
        })?;
        for (col, f) in Feature::ALL.iter().enumerate() {
            let v = parse_cell(&rec, row, col + 1)?;
            target.feature_counts.insert(*f, v);
        }
    }
    Ok(())
}

fn fmt_count(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Write per-unit type counts in the fixture schema.
pub fn write_type_csv(stats: &[TypeStats]) -> String {
    let mut out = TYPE_HEADER.join(",");
    out.push('\n');
    for s in stats {
        let mut row = vec![s.unit.clone()];
        row.extend(BaseType::ALL.iter().map(|&t| fmt_count(s.type_count(t))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write per-unit feature counts in the fixture schema.
pub fn write_feature_csv(stats: &[TypeStats]) -> String {
    let mut out = FEATURE_HEADER.join(",");
    out.push('\n');
    for s in stats {
        let mut row = vec![s.unit.clone()];
        row.extend(Feature::ALL.iter().map(|&f| fmt_count(s.feature_count(f))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write the input schema plus a `score` column: the fraction of each
/// unit's base-scalar declarations covered by the selected types (0
/// when the unit declares no base scalars).
pub fn write_scored_csv(stats: &[TypeStats], selected: &[BaseType]) -> String {
    let mut out = TYPE_HEADER.join(",");
    out.push_str(",score\n");
    for s in stats {
        let total: f64 = BaseType::SELECTABLE.iter().map(|&t| s.type_count(t)).sum();
        let covered: f64 = selected.iter().map(|&t| s.type_count(t)).sum();
        let score = if total > 0.0 { covered / total } else { 0.0 };
        let mut row = vec![s.unit.clone()];
        row.extend(BaseType::ALL.iter().map(|&t| fmt_count(s.type_count(t))));
        row.push(format!("{score:.4}"));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    fn stats_of(src: &str, weight: f64) -> TypeStats {
        collect_stats(&parse(src).expect("parses"), weight)
    }

    #[test]
    fn empty_source_counts_nothing() {
        let s = stats_of("", 10.0);
        assert!(s.type_counts.is_empty());
        assert!(s.feature_counts.is_empty());
    }

    #[test]
    fn loop_with_array_write_hits_every_counter() {
        let s = stats_of("int x;\nvoid main() { for (int i = 0; i < 3; i++) { a[i] = x; } }", 10.0);
        assert_eq!(s.type_count(BaseType::Int), 2.0);
        assert_eq!(s.feature_count(Feature::Loops), 1.0);
        assert_eq!(s.feature_count(Feature::Conditions), 1.0);
        assert_eq!(s.feature_count(Feature::ArrayOps), 1.0);
        // Declarations of x and i count 1 each (both sit outside the
        // loop body); the guard, step, index, and rhs occurrences count
        // 10 each. `a` is undeclared and resolves to nothing.
        assert_eq!(s.weighted_count(BaseType::Int), 2.0 + 4.0 * 10.0);
    }

    #[test]
    fn qualifiers_count_once_each() {
        let s = stats_of("static const unsigned int k = 1;", 10.0);
        assert_eq!(s.feature_count(Feature::Static), 1.0);
        assert_eq!(s.feature_count(Feature::Const), 1.0);
        assert_eq!(s.feature_count(Feature::Unsigned), 1.0);
        assert_eq!(s.type_count(BaseType::Int), 1.0);
    }

    #[test]
    fn composite_declarations_count_under_their_markers() {
        let src = "struct P { int x; float y; };\ntypedef long Ticket;\n\
                   struct P p;\nTicket t;\nenum Color { Red, Green };\nenum Color c;";
        let s = stats_of(src, 10.0);
        assert_eq!(s.type_count(BaseType::Struct), 1.0);
        assert_eq!(s.type_count(BaseType::Enum), 1.0);
        // The typedef item plus the declaration through the alias; the
        // alias target is not itself a variable declaration.
        assert_eq!(s.type_count(BaseType::Typedef), 2.0);
        assert_eq!(s.type_count(BaseType::Long), 0.0);
        // Struct fields declare their own base types.
        assert_eq!(s.type_count(BaseType::Int), 1.0);
        assert_eq!(s.type_count(BaseType::Float), 1.0);
    }

    #[test]
    fn nested_loops_weight_multiplicatively() {
        let src = "void main() { int s; while (s) { while (s) { s = 1; } } }";
        let s = stats_of(src, 10.0);
        assert_eq!(s.feature_count(Feature::Loops), 2.0);
        assert_eq!(s.feature_count(Feature::Conditions), 2.0);
        // decl 1, outer guard 10, inner guard 100, inner target 100.
        assert_eq!(s.weighted_count(BaseType::Int), 1.0 + 10.0 + 100.0 + 100.0);
    }

    #[test]
    fn weight_one_still_dominates_declaration_counts() {
        let src = "float f;\nvoid main() { f = f + 1; while (f) { f = f - 1; } }";
        let s = stats_of(src, 1.0);
        assert!(s.weighted_count(BaseType::Float) >= s.type_count(BaseType::Float));
    }

    #[test]
    fn aggregate_averages_and_rejects_empty() {
        let mut a = TypeStats::new("a");
        a.type_counts.insert(BaseType::Int, 2.0);
        let mut b = TypeStats::new("b");
        b.type_counts.insert(BaseType::Int, 4.0);
        let avg = aggregate(&[a.clone(), b]).expect("aggregates");
        assert_eq!(avg.type_count(BaseType::Int), 3.0);
        let single = aggregate(&[a.clone()]).expect("aggregates");
        for t in BaseType::ALL {
            assert_eq!(single.type_count(t), a.type_count(t));
        }
        for f in Feature::ALL {
            assert_eq!(single.feature_count(f), a.feature_count(f));
        }
        assert!(matches!(aggregate(&[]), Err(AnalyzerError::EmptyCorpus)));
    }

    #[test]
    fn selection_ranks_by_score_with_fixed_tie_order() {
        let mut s = TypeStats::new("u");
        s.type_counts.insert(BaseType::Char, 9.0);
        s.type_counts.insert(BaseType::Long, 9.0);
        s.type_counts.insert(BaseType::Double, 1.0);
        assert_eq!(
            select_sdt(&s, 3, false),
            vec![BaseType::Char, BaseType::Long, BaseType::Double]
        );
        let zero = TypeStats::new("z");
        assert_eq!(select_sdt(&zero, 2, false), vec![BaseType::Int, BaseType::Float]);
    }

    #[test]
    fn selection_is_scale_invariant() {
        let mut s = TypeStats::new("u");
        s.type_counts.insert(BaseType::Int, 5.0);
        s.type_counts.insert(BaseType::Float, 3.0);
        s.type_counts.insert(BaseType::Char, 8.0);
        let base = select_sdt(&s, 4, false);
        for scale in [0.5, 2.0, 1000.0] {
            let mut scaled = s.clone();
            scaled.type_counts.values_mut().for_each(|v| *v *= scale);
            assert_eq!(select_sdt(&scaled, 4, false), base);
        }
    }

    #[test]
    fn csv_round_trips_and_checks_schema() {
        let text = "unit,int,float,double,long,char,struct,enum,typedef\n\
                    alpha,3,0,1,0,2,0,0,0\nbeta,1,4,0,2,0,1,0,3\n";
        let stats = read_type_csv(text).expect("reads");
        assert_eq!(stats.len(), 2);
        assert_eq!(stats[0].unit, "alpha");
        assert_eq!(stats[1].type_count(BaseType::Float), 4.0);
        assert_eq!(write_type_csv(&stats), text);

        let bad = read_type_csv("unit,int\nalpha,3\n");
        assert!(matches!(bad, Err(AnalyzerError::Schema { row: 1, .. })));
        let junk = read_type_csv(
            "unit,int,float,double,long,char,struct,enum,typedef\nalpha,x,0,0,0,0,0,0,0\n",
        );
        assert!(matches!(junk, Err(AnalyzerError::Schema { row: 2, .. })));
    }

    #[test]
    fn feature_csv_attaches_by_unit_name() {
        let mut stats = vec![TypeStats::new("alpha")];
        attach_features(
            &mut stats,
            "unit,loops,conditions,static,const,unsigned,arrayOps\nalpha,2,5,0,1,0,7\n",
        )
        .expect("attaches");
        assert_eq!(stats[0].feature_count(Feature::Loops), 2.0);
        assert_eq!(stats[0].feature_count(Feature::ArrayOps), 7.0);
        let err = attach_features(
            &mut stats,
            "unit,loops,conditions,static,const,unsigned,arrayOps\nghost,1,1,0,0,0,0\n",
        );
        assert!(matches!(err, Err(AnalyzerError::Schema { row: 2, .. })));
    }

    #[test]
    fn scored_csv_reports_selected_coverage() {
        let text = "unit,int,float,double,long,char,struct,enum,typedef\nalpha,3,1,0,0,0,0,0,0\n";
        let stats = read_type_csv(text).expect("reads");
        let out = write_scored_csv(&stats, &[BaseType::Int]);
        let mut lines = out.lines();
        assert_eq!(
            lines.next().unwrap(),
            "unit,int,float,double,long,char,struct,enum,typedef,score"
        );
        assert_eq!(lines.next().unwrap(), "alpha,3,1,0,0,0,0,0,0,0.7500");
    }
}
