//! The `.ops` presentation language.
//!
//! ```text
//! name "pre-lie";
//! op * : 2 plain;
//! (x*y)*z - x*(y*z) - (x*z)*y + x*(z*y) = 0;
//! ```
//!
//! Statements end with `;` and `#` starts a comment. Generators are declared
//! with `op NAME : ARITY [plain|sym|antisym];` where `NAME` is an identifier
//! or a run of the symbol characters `* . ^ & | % @ ! $ ?`. Symbol-named
//! binary generators are written infix (left associative, all at one
//! precedence); every generator may be applied in call form `f(u,v,w)`.
//! Identities are `lhs = rhs;` where each side is a signed sum of terms, each
//! optionally preceded by coefficients: rational literals `3/2`, declared
//! parameters, or bracketed coefficient expressions `[1 + alpha]`.
//!
//! Families declare `param a, b;` and sample points with
//! `sample a = 1, b = -1;` or `grid a in {0, 1}, b in {1, 2};`. A
//! `koszul 1, 1, 1;` statement records Koszul dual dimensions. A
//! `basis { op ...; x*y = ...; }` block rewrites all identities into new
//! binary generators, each old binary generator being given by a rule.
//!
//! The words `op name param sample grid koszul basis` are reserved at the
//! start of a statement.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Coeff;
use crate::poly::parse_rational;
use crate::presentation::{change_generator_basis, BasisChange, BasisRule, GeneratorSpec, Presentation, RawIdentity, Symmetry, Term};

const SYMBOL_CHARS: &str = "*.^&|%@!$?";
const MAX_DEPTH: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(String),
    Str(String),
    Punct(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (sl, sc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            advance(j - start, &mut i);
            out.push(Token {
                tok: Tok::Ident(chars[start..j].iter().collect()),
                line: sl,
                col: sc,
            });
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            advance(j - start, &mut i);
            out.push(Token {
                tok: Tok::Num(chars[start..j].iter().collect()),
                line: sl,
                col: sc,
            });
        } else if SYMBOL_CHARS.contains(c) {
            let start = i;
            let mut j = i;
            while j < chars.len() && SYMBOL_CHARS.contains(chars[j]) {
                j += 1;
            }
            advance(j - start, &mut i);
            out.push(Token {
                tok: Tok::Sym(chars[start..j].iter().collect()),
                line: sl,
                col: sc,
            });
        } else if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(Error::Syntax {
                    line: sl,
                    col: sc,
                    msg: "unterminated string".into(),
                });
            }
            let s: String = chars[start..j].iter().collect();
            advance(j + 1 - i, &mut i);
            out.push(Token {
                tok: Tok::Str(s),
                line: sl,
                col: sc,
            });
        } else if "()[]{},;:=+-/".contains(c) {
            advance(1, &mut i);
            out.push(Token {
                tok: Tok::Punct(c),
                line: sl,
                col: sc,
            });
        } else {
            return Err(Error::Syntax {
                line: sl,
                col: sc,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// A coefficient that may depend on parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffExpr {
    Num(Coeff),
    Param(String),
    Neg(Box<CoeffExpr>),
    Add(Box<CoeffExpr>, Box<CoeffExpr>),
    Sub(Box<CoeffExpr>, Box<CoeffExpr>),
    Mul(Box<CoeffExpr>, Box<CoeffExpr>),
    Div(Box<CoeffExpr>, Box<CoeffExpr>),
}

pub type Sample = BTreeMap<String, Coeff>;

impl CoeffExpr {
    pub fn eval(&self, sample: &Sample) -> std::result::Result<Coeff, String> {
        Ok(match self {
            CoeffExpr::Num(c) => c.clone(),
            CoeffExpr::Param(p) => sample.get(p).cloned().ok_or_else(|| format!("no value for parameter `{p}`"))?,
            CoeffExpr::Neg(a) => -a.eval(sample)?,
            CoeffExpr::Add(a, b) => a.eval(sample)? + b.eval(sample)?,
            CoeffExpr::Sub(a, b) => a.eval(sample)? - b.eval(sample)?,
            CoeffExpr::Mul(a, b) => a.eval(sample)? * b.eval(sample)?,
            CoeffExpr::Div(a, b) => {
                let d = b.eval(sample)?;
                if d.is_zero() {
                    return Err("division by zero in coefficient".into());
                }
                a.eval(sample)? / d
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located<T> {
    pub value: T,
    pub line: usize,
    pub col: usize,
}

pub type LinearTerms = Vec<(CoeffExpr, Term)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub old: String,
    pub args: [String; 2],
    pub rhs: LinearTerms,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BasisDecl {
    pub generators: Vec<GeneratorSpec>,
    pub rules: Vec<Located<RuleDecl>>,
}

/// A parsed `.ops` file, possibly with parameters.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Document {
    pub name: Option<String>,
    pub generators: Vec<GeneratorSpec>,
    pub params: Vec<String>,
    pub samples: Vec<Sample>,
    pub koszul: Option<Vec<u64>>,
    pub identities: Vec<Located<LinearTerms>>,
    pub basis: Option<BasisDecl>,
}

impl Document {
    pub fn is_parametric(&self) -> bool {
        !self.params.is_empty()
    }

    /// The presentation with parameters set to `sample`.
    pub fn instantiate(&self, sample: &Sample) -> Result<Presentation> {
        for p in &self.params {
            if !sample.contains_key(p) {
                return Err(Error::Semantic {
                    line: 1,
                    col: 1,
                    msg: format!("sample gives no value for parameter `{p}`"),
                });
            }
        }
        let eval_terms = |terms: &LinearTerms, line: usize, col: usize| -> Result<BTreeMap<Term, Coeff>> {
            let mut acc: BTreeMap<Term, Coeff> = BTreeMap::new();
            for (c, t) in terms {
                let v = c.eval(sample).map_err(|msg| Error::Semantic { line, col, msg })?;
                *acc.entry(t.clone()).or_insert_with(Coeff::zero) += v;
            }
            acc.retain(|_, c| !c.is_zero());
            Ok(acc)
        };
        let name = self.name.clone().unwrap_or_default();
        let mut identities = Vec::new();
        for (i, id) in self.identities.iter().enumerate() {
            let terms = eval_terms(&id.value, id.line, id.col)?;
            if terms.is_empty() {
                return Err(Error::ZeroIdentity(format!("#{} at {}:{}", i + 1, id.line, id.col)));
            }
            identities.push(RawIdentity::new(terms));
        }
        let p = Presentation {
            name,
            generators: self.generators.clone(),
            identities,
        };
        p.validate()?;
        let Some(basis) = &self.basis else { return Ok(p) };
        let mut rules = Vec::new();
        for r in &basis.rules {
            rules.push(BasisRule {
                old: r.value.old.clone(),
                args: r.value.args.clone(),
                rhs: eval_terms(&r.value.rhs, r.line, r.col)?,
            });
        }
        let change = BasisChange {
            new_generators: basis.generators.clone(),
            rules,
        };
        let mut out = change_generator_basis(&p, &change)?;
        out.identities.retain(|id| !id.terms.is_empty());
        Ok(out)
    }

    /// The presentation of a document without parameters.
    pub fn presentation(&self) -> Result<Presentation> {
        if self.is_parametric() {
            return Err(Error::Semantic {
                line: 1,
                col: 1,
                msg: format!("presentation has parameters ({}); give a sample", self.params.join(", ")),
            });
        }
        self.instantiate(&Sample::new())
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    ops: HashMap<String, usize>,
    params: Vec<String>,
    depth: usize,
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "op" | "name" | "param" | "sample" | "grid" | "koszul" | "basis")
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) | Tok::Num(s) | Tok::Sym(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<Token> {
        if self.peek().tok == Tok::Punct(c) {
            Ok(self.bump())
        } else {
            self.err(format!("expected `{c}`, found {}", Self::describe(&self.peek().tok)))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected {what}, found {}", Self::describe(other))),
        }
    }

    fn number(&mut self) -> Result<Coeff> {
        let neg = self.eat('-');
        match &self.peek().tok {
            Tok::Num(s) => {
                let Some(v) = parse_rational(s) else {
                    return self.err(format!("invalid number `{s}`"));
                };
                self.bump();
                Ok(if neg { -v } else { v })
            }
            other => self.err(format!("expected a number, found {}", Self::describe(other))),
        }
    }

    fn document(mut self) -> Result<Document> {
        let mut doc = Document::default();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(k) if is_keyword(k) => {
                    let k = k.clone();
                    self.bump();
                    match k.as_str() {
                        "op" => {
                            let g = self.op_decl(&t)?;
                            if doc.generators.iter().any(|h| h.name == g.name) {
                                return Err(Error::Semantic {
                                    line: t.line,
                                    col: t.col,
                                    msg: format!("generator `{}` declared twice", g.name),
                                });
                            }
                            doc.generators.push(g);
                        }
                        "name" => {
                            match self.bump().tok {
                                Tok::Str(s) => doc.name = Some(s),
                                other => {
                                    self.pos -= 1;
                                    return self.err(format!("expected a quoted name, found {}", Self::describe(&other)));
                                }
                            }
                            self.expect(';')?;
                        }
                        "param" => {
                            loop {
                                let p = self.ident("a parameter name")?;
                                if self.ops.contains_key(&p) || self.params.contains(&p) {
                                    return Err(Error::Semantic {
                                        line: t.line,
                                        col: t.col,
                                        msg: format!("`{p}` is already declared"),
                                    });
                                }
                                self.params.push(p);
                                if !self.eat(',') {
                                    break;
                                }
                            }
                            self.expect(';')?;
                            doc.params = self.params.clone();
                        }
                        "sample" => {
                            let mut s = Sample::new();
                            loop {
                                let p = self.param_ref()?;
                                self.expect('=')?;
                                s.insert(p, self.number()?);
                                if !self.eat(',') {
                                    break;
                                }
                            }
                            self.expect(';')?;
                            doc.samples.push(s);
                        }
                        "grid" => {
                            let mut axes: Vec<(String, Vec<Coeff>)> = Vec::new();
                            loop {
                                let p = self.param_ref()?;
                                if self.ident("`in`")? != "in" {
                                    self.pos -= 1;
                                    return self.err("expected `in`");
                                }
                                self.expect('{')?;
                                let mut vals = vec![self.number()?];
                                while self.eat(',') {
                                    vals.push(self.number()?);
                                }
                                self.expect('}')?;
                                axes.push((p, vals));
                                if !self.eat(',') {
                                    break;
                                }
                            }
                            self.expect(';')?;
                            let mut points = vec![Sample::new()];
                            for (p, vals) in axes {
                                points = points
                                    .into_iter()
                                    .flat_map(|s| {
                                        let p = &p;
                                        vals.iter().map(move |v| {
                                            let mut s = s.clone();
                                            s.insert(p.clone(), v.clone());
                                            s
                                        })
                                    })
                                    .collect();
                            }
                            doc.samples.extend(points);
                        }
                        "koszul" => {
                            let mut dims = Vec::new();
                            loop {
                                match &self.peek().tok {
                                    Tok::Num(s) if s.parse::<u64>().is_ok() => {
                                        dims.push(s.parse().unwrap_or(0));
                                        self.bump();
                                    }
                                    other => return self.err(format!("expected a dimension, found {}", Self::describe(other))),
                                }
                                if !self.eat(',') {
                                    break;
                                }
                            }
                            self.expect(';')?;
                            doc.koszul = Some(dims);
                        }
                        _ => {
                            if doc.basis.is_some() {
                                return Err(Error::Semantic {
                                    line: t.line,
                                    col: t.col,
                                    msg: "only one basis block is allowed".into(),
                                });
                            }
                            doc.basis = Some(self.basis_block(&doc.generators)?);
                        }
                    }
                }
                _ => {
                    let lhs = self.sum()?;
                    self.expect('=')?;
                    let rhs = self.sum()?;
                    self.expect(';')?;
                    let mut terms = lhs;
                    terms.extend(rhs.into_iter().map(|(c, t)| (CoeffExpr::Neg(Box::new(c)), t)));
                    doc.identities.push(Located {
                        value: terms,
                        line: t.line,
                        col: t.col,
                    });
                }
            }
        }
        Ok(doc)
    }

    fn param_ref(&mut self) -> Result<String> {
        let t = self.peek().clone();
        let p = self.ident("a parameter name")?;
        if !self.params.contains(&p) {
            return Err(Error::Semantic {
                line: t.line,
                col: t.col,
                msg: format!("`{p}` is not a declared parameter"),
            });
        }
        Ok(p)
    }

    fn op_decl(&mut self, at: &Token) -> Result<GeneratorSpec> {
        let name = match &self.peek().tok {
            Tok::Ident(s) | Tok::Sym(s) => s.clone(),
            other => return self.err(format!("expected a generator name, found {}", Self::describe(other))),
        };
        if is_keyword(&name) || self.params.contains(&name) {
            return self.err(format!("`{name}` cannot name a generator"));
        }
        self.bump();
        self.expect(':')?;
        let arity: usize = match &self.peek().tok {
            Tok::Num(s) => match s.parse() {
                Ok(a) => a,
                Err(_) => return self.err(format!("invalid arity `{s}`")),
            },
            other => return self.err(format!("expected an arity, found {}", Self::describe(other))),
        };
        self.bump();
        let symmetry = match &self.peek().tok {
            Tok::Ident(s) if s == "plain" => Symmetry::Plain,
            Tok::Ident(s) if s == "sym" => Symmetry::Symmetric,
            Tok::Ident(s) if s == "antisym" => Symmetry::Antisymmetric,
            Tok::Punct(';') => {
                self.bump();
                return self.finish_op(name, arity, Symmetry::Plain, at);
            }
            other => return self.err(format!("expected plain, sym or antisym, found {}", Self::describe(other))),
        };
        self.bump();
        self.expect(';')?;
        self.finish_op(name, arity, symmetry, at)
    }

    fn finish_op(&mut self, name: String, arity: usize, symmetry: Symmetry, at: &Token) -> Result<GeneratorSpec> {
        let g = GeneratorSpec::new(name, arity, symmetry);
        g.check().map_err(|e| Error::Semantic {
            line: at.line,
            col: at.col,
            msg: e.to_string(),
        })?;
        self.ops.insert(g.name.clone(), arity);
        Ok(g)
    }

    fn basis_block(&mut self, old: &[GeneratorSpec]) -> Result<BasisDecl> {
        self.expect('{')?;
        let mut decl = BasisDecl::default();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Punct('}') => {
                    self.bump();
                    self.eat(';');
                    break;
                }
                Tok::Ident(k) if k == "op" => {
                    self.bump();
                    let g = self.op_decl(&t)?;
                    if old.iter().chain(&decl.generators).any(|h| h.name == g.name) {
                        return Err(Error::Semantic {
                            line: t.line,
                            col: t.col,
                            msg: format!("generator `{}` declared twice", g.name),
                        });
                    }
                    decl.generators.push(g);
                }
                Tok::Eof => return self.err("unterminated basis block"),
                _ => {
                    let lhs = self.product()?;
                    let Term::App(f, args) = &lhs else {
                        return Err(Error::Semantic {
                            line: t.line,
                            col: t.col,
                            msg: "a basis rule must start with a generator applied to two variables".into(),
                        });
                    };
                    let (Some(g), [Term::Var(a), Term::Var(b)]) = (old.iter().find(|g| &g.name == f), args.as_slice()) else {
                        return Err(Error::Semantic {
                            line: t.line,
                            col: t.col,
                            msg: "a basis rule must start with an old binary generator applied to two variables".into(),
                        });
                    };
                    if a == b || g.arity != 2 {
                        return Err(Error::Semantic {
                            line: t.line,
                            col: t.col,
                            msg: "a basis rule needs two distinct variables".into(),
                        });
                    }
                    self.expect('=')?;
                    let rhs = self.sum()?;
                    self.expect(';')?;
                    decl.rules.push(Located {
                        value: RuleDecl {
                            old: f.clone(),
                            args: [a.clone(), b.clone()],
                            rhs,
                        },
                        line: t.line,
                        col: t.col,
                    });
                }
            }
        }
        for g in &decl.generators {
            self.ops.remove(&g.name);
        }
        Ok(decl)
    }

    fn starts_coefficient(&self) -> bool {
        match &self.peek().tok {
            Tok::Num(_) | Tok::Punct('[') => true,
            Tok::Ident(s) => self.params.contains(s),
            _ => false,
        }
    }

    fn starts_term(&self) -> bool {
        match &self.peek().tok {
            Tok::Punct('(') => true,
            Tok::Ident(s) => !self.params.contains(s),
            _ => false,
        }
    }

    fn sum(&mut self) -> Result<LinearTerms> {
        let mut out = Vec::new();
        let mut first = true;
        loop {
            let negative = if self.eat('-') {
                true
            } else if self.eat('+') {
                false
            } else if first {
                false
            } else {
                break;
            };
            first = false;
            let mut coef: Option<CoeffExpr> = None;
            let mut literal_zero = true;
            while self.starts_coefficient() {
                let item = match self.bump().tok {
                    Tok::Num(s) => {
                        let Some(v) = parse_rational(&s) else {
                            self.pos -= 1;
                            return self.err(format!("invalid number `{s}`"));
                        };
                        literal_zero &= v.is_zero();
                        CoeffExpr::Num(v)
                    }
                    Tok::Ident(p) => {
                        literal_zero = false;
                        CoeffExpr::Param(p)
                    }
                    _ => {
                        literal_zero = false;
                        let e = self.coeff_expr()?;
                        self.expect(']')?;
                        e
                    }
                };
                coef = Some(match coef {
                    None => item,
                    Some(c) => CoeffExpr::Mul(Box::new(c), Box::new(item)),
                });
            }
            if self.starts_term() {
                let term = self.product()?;
                let mut c = coef.unwrap_or(CoeffExpr::Num(Coeff::one()));
                if negative {
                    c = CoeffExpr::Neg(Box::new(c));
                }
                out.push((c, term));
            } else if coef.is_none() || !literal_zero {
                return self.err(format!("expected a term, found {}", Self::describe(&self.peek().tok)));
            }
        }
        Ok(out)
    }

    fn coeff_expr(&mut self) -> Result<CoeffExpr> {
        let mut e = self.coeff_product()?;
        loop {
            if self.eat('+') {
                e = CoeffExpr::Add(Box::new(e), Box::new(self.coeff_product()?));
            } else if self.eat('-') {
                e = CoeffExpr::Sub(Box::new(e), Box::new(self.coeff_product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn coeff_product(&mut self) -> Result<CoeffExpr> {
        let mut e = self.coeff_unary()?;
        loop {
            if matches!(&self.peek().tok, Tok::Sym(s) if s == "*") {
                self.bump();
                e = CoeffExpr::Mul(Box::new(e), Box::new(self.coeff_unary()?));
            } else if self.eat('/') {
                e = CoeffExpr::Div(Box::new(e), Box::new(self.coeff_unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn coeff_unary(&mut self) -> Result<CoeffExpr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let r = if self.eat('-') {
            Ok(CoeffExpr::Neg(Box::new(self.coeff_unary()?)))
        } else if self.eat('(') {
            let e = self.coeff_expr()?;
            self.expect(')')?;
            Ok(e)
        } else {
            match self.peek().tok.clone() {
                Tok::Num(s) => match parse_rational(&s) {
                    Some(v) => {
                        self.bump();
                        Ok(CoeffExpr::Num(v))
                    }
                    None => self.err(format!("invalid number `{s}`")),
                },
                Tok::Ident(p) if self.params.contains(&p) => {
                    self.bump();
                    Ok(CoeffExpr::Param(p))
                }
                Tok::Ident(p) => {
                    let t = self.peek();
                    Err(Error::Semantic {
                        line: t.line,
                        col: t.col,
                        msg: format!("`{p}` is not a declared parameter"),
                    })
                }
                other => self.err(format!("expected a coefficient, found {}", Self::describe(&other))),
            }
        };
        self.depth -= 1;
        r
    }

    fn product(&mut self) -> Result<Term> {
        let mut lhs = self.primary()?;
        while let Tok::Sym(s) = self.peek().tok.clone() {
            let t = self.peek().clone();
            match self.ops.get(&s) {
                Some(2) => {}
                Some(_) => {
                    return Err(Error::Semantic {
                        line: t.line,
                        col: t.col,
                        msg: format!("generator `{s}` is not binary and cannot be used infix"),
                    })
                }
                None => {
                    return Err(Error::UndeclaredAt {
                        name: s,
                        line: t.line,
                        col: t.col,
                    })
                }
            }
            self.bump();
            let rhs = self.primary()?;
            lhs = Term::App(s, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Term> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let t = self.peek().clone();
        let r = match &t.tok {
            Tok::Punct('(') => {
                self.bump();
                let inner = self.product()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) | Tok::Sym(name) if *self.peek_at(1) == Tok::Punct('(') => {
                let name = name.clone();
                let Some(&arity) = self.ops.get(&name) else {
                    return Err(Error::UndeclaredAt {
                        name,
                        line: t.line,
                        col: t.col,
                    });
                };
                self.bump();
                self.bump();
                let mut args = vec![self.product()?];
                while self.eat(',') {
                    args.push(self.product()?);
                }
                self.expect(')')?;
                if args.len() != arity {
                    return Err(Error::Semantic {
                        line: t.line,
                        col: t.col,
                        msg: format!("`{name}` takes {arity} arguments, got {}", args.len()),
                    });
                }
                Ok(Term::App(name, args))
            }
            Tok::Ident(name) if !self.ops.contains_key(name) && !self.params.contains(name) => {
                let name = name.clone();
                self.bump();
                Ok(Term::Var(name))
            }
            other => self.err(format!("expected a term, found {}", Self::describe(other))),
        };
        self.depth -= 1;
        r
    }
}

/// Parses a document, keeping parameters symbolic.
pub fn parse_document(text: &str) -> Result<Document> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        ops: HashMap::new(),
        params: Vec::new(),
        depth: 0,
    }
    .document()
}

/// Parses a parameter assignment such as `a=1, b=-1/2`.
pub fn parse_sample(text: &str) -> Result<Sample> {
    let mut s = Sample::new();
    for item in text.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::BadSample(item.to_string()))?;
        let v: Coeff = v.trim().parse().map_err(|_| Error::BadSample(item.to_string()))?;
        let k = k.trim();
        if k.is_empty() || s.insert(k.to_string(), v).is_some() {
            return Err(Error::BadSample(item.to_string()));
        }
    }
    Ok(s)
}

/// Parses a presentation without parameters.
pub fn parse_dsl(text: &str) -> Result<Presentation> {
    parse_document(text)?.presentation()
}

fn is_symbol(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| SYMBOL_CHARS.contains(c))
}

fn print_term(gens: &[GeneratorSpec], t: &Term, top: bool) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::App(f, args) if args.len() == 2 && is_symbol(f) => {
            let s = format!("{}{f}{}", print_term(gens, &args[0], false), print_term(gens, &args[1], false));
            if top {
                s
            } else {
                format!("({s})")
            }
        }
        Term::App(f, args) => {
            let inner: Vec<String> = args.iter().map(|a| print_term(gens, a, true)).collect();
            format!("{f}({})", inner.join(","))
        }
    }
}

/// Prints a presentation in the `.ops` language.
pub fn print_presentation(p: &Presentation) -> String {
    let mut out = String::new();
    if !p.name.is_empty() {
        out.push_str(&format!("name \"{}\";\n", p.name));
    }
    for g in &p.generators {
        out.push_str(&format!("op {} : {} {};\n", g.name, g.arity, g.symmetry.keyword()));
    }
    for id in &p.identities {
        let mut line = String::new();
        for (i, (t, c)) in id.terms.iter().enumerate() {
            let negative = c < &Coeff::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => line.push_str("- "),
                (0, false) => {}
                (_, true) => line.push_str(" - "),
                (_, false) => line.push_str(" + "),
            }
            if !mag.is_one() {
                line.push_str(&format!("{mag} "));
            }
            line.push_str(&print_term(&p.generators, t, true));
        }
        out.push_str(&format!("{line} = 0;\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    #[test]
    fn parses_pre_lie() {
        let p = parse_dsl("op * : 2 plain; (x*y)*z - x*(y*z) - (x*z)*y + x*(z*y) = 0;").unwrap();
        assert_eq!(p.generators.len(), 1);
        assert_eq!(p.identities[0].terms.len(), 4);
    }

    #[test]
    fn parses_lie_call_syntax() {
        let p = parse_dsl("op b : 2 antisym; b(b(x,y),z) + b(b(y,z),x) + b(b(z,x),y) = 0;").unwrap();
        assert_eq!(p.identities[0].terms.len(), 3);
    }

    #[test]
    fn syntax_error_location() {
        let e = parse_dsl("op * : 2 plain;\nx*(y = 0;").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 2, col: 6, .. }), "{e:?}");
    }

    #[test]
    fn undeclared_location() {
        let e = parse_dsl("op * : 2 plain;\n  f(x,y) = 0;").unwrap_err();
        assert!(matches!(e, Error::UndeclaredAt { line: 2, col: 3, .. }), "{e:?}");
    }

    #[test]
    fn parameters_and_grid() {
        let doc = parse_document(
            "op * : 2 plain; param a, b; grid a in {1, 2}, b in {0, -1}; a (x*x)*x + [b - 1/2] x*(x*x) = 0;",
        )
        .unwrap();
        assert_eq!(doc.samples.len(), 4);
        let p = doc.instantiate(&doc.samples[1]).unwrap();
        let coeffs: Vec<&Coeff> = p.identities[0].terms.values().collect();
        assert!(coeffs.contains(&&int(1)));
        assert!(coeffs.contains(&&Coeff::new(int(-3).numer().clone(), int(2).numer().clone())));
    }

    #[test]
    fn zero_identity_rejected() {
        let doc = parse_document("op * : 2 plain; param a; sample a = 0; a (x*x)*x = 0;").unwrap();
        assert!(matches!(doc.instantiate(&doc.samples[0]), Err(Error::ZeroIdentity(_))));
    }

    #[test]
    fn round_trip() {
        let text = "name \"t\"; op * : 2 plain; op b : 2 antisym; 3/2 (x*y)*z - b(x,b(y,z)) = 0;";
        let p = parse_dsl(text).unwrap();
        assert_eq!(parse_dsl(&print_presentation(&p)).unwrap(), p);
    }
}
