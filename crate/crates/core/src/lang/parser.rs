//! Recursive-descent parser. Statements are self-delimiting; `;` is optional.

use super::ast::*;
use super::lexer::{lex, Tok};
use super::units::is_atom;
use super::{ErrorKind, LangError};

const KEYWORDS: &[&str] = &["mcdp", "provides", "requires", "instance", "choose", "ignore", "required", "provided", "by"];
const FUNCTIONS: &[&str] = &["ceil", "sqrt", "ceilsqrt", "max"];

pub fn parse(src: &str) -> Result<ModelAst, LangError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let m = p.model()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.unexpected("end of input"));
    }
    Ok(m)
}

/// Parses a unit as written inside brackets, e.g. `Wh/kg`; empty text is dimensionless.
pub fn parse_unit(text: &str) -> Result<UnitAst, LangError> {
    let mut p = Parser { toks: lex(&format!("[{text}]"))?, pos: 0 };
    let u = p.bracket_unit()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.unexpected("end of unit"));
    }
    Ok(u)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> LangError {
        LangError::new(ErrorKind::Syntax, self.span(), format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> Result<Span, LangError> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, LangError> {
        if self.is_kw(kw) {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), LangError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn model(&mut self) -> Result<ModelAst, LangError> {
        let span = self.expect_kw("mcdp")?;
        self.expect(Tok::LBrace, "`{` after `mcdp`")?;
        let mut m = ModelAst { provides: Vec::new(), requires: Vec::new(), statements: Vec::new(), span };
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(m);
                }
                Tok::Semi => {
                    self.bump();
                }
                Tok::Eof => return Err(self.unexpected("`}`")),
                _ => self.statement(&mut m)?,
            }
        }
    }

    fn port_decl(&mut self) -> Result<PortDecl, LangError> {
        let (name, span) = self.ident("a port name")?;
        let unit = if matches!(self.peek(), Tok::LBracket) { Some(self.bracket_unit()?) } else { None };
        Ok(PortDecl { name, unit, span })
    }

    fn statement(&mut self, m: &mut ModelAst) -> Result<(), LangError> {
        if self.is_kw("provides") {
            self.bump();
            m.provides.push(self.port_decl()?);
            return Ok(());
        }
        if self.is_kw("requires") {
            self.bump();
            m.requires.push(self.port_decl()?);
            return Ok(());
        }
        if self.is_kw("ignore") {
            let span = self.bump().1;
            let (port, _) = self.ident("a resource name")?;
            self.expect_kw("required")?;
            self.expect_kw("by")?;
            let (instance, _) = self.ident("an instance name")?;
            m.statements.push(Stmt::Ignore { port, instance, span });
            return Ok(());
        }
        if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Eq) {
            let (name, span) = self.ident("a name")?;
            self.bump();
            if self.is_kw("instance") {
                self.bump();
                let of = if self.is_kw("choose") { self.choose()? } else { InstanceOf::Model(self.model_ref()?) };
                m.statements.push(Stmt::Instance { name, of, span });
            } else if self.is_kw("choose") {
                let of = self.choose()?;
                m.statements.push(Stmt::Instance { name, of, span });
            } else {
                let expr = self.expr()?;
                m.statements.push(Stmt::Let { name, expr, span });
            }
            return Ok(());
        }
        let span = self.span();
        let lhs = self.expr()?;
        let stmt = match self.peek() {
            Tok::Geq => {
                self.bump();
                Stmt::Constraint { greater: lhs, lesser: self.expr()?, span }
            }
            Tok::Leq => {
                self.bump();
                Stmt::Constraint { greater: self.expr()?, lesser: lhs, span }
            }
            _ => return Err(self.unexpected("`>=` or `<=`")),
        };
        m.statements.push(stmt);
        Ok(())
    }

    fn model_ref(&mut self) -> Result<ModelRef, LangError> {
        match self.peek().clone() {
            Tok::ModelRef(name) => {
                let span = self.bump().1;
                Ok(ModelRef::Named(name, span))
            }
            Tok::Ident(s) if s == "mcdp" => Ok(ModelRef::Inline(Box::new(self.model()?))),
            _ => Err(self.unexpected("a model reference (`Name) or an inline `mcdp { ... }`")),
        }
    }

    fn choose(&mut self) -> Result<InstanceOf, LangError> {
        self.expect_kw("choose")?;
        self.expect(Tok::LParen, "`(` after `choose`")?;
        let mut alts = Vec::new();
        loop {
            let (tag, _) = self.ident("an alternative name")?;
            self.expect(Tok::Colon, "`:` after the alternative name")?;
            alts.push((tag, self.model_ref()?));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    if matches!(self.peek(), Tok::RParen) {
                        self.bump();
                        break;
                    }
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
        Ok(InstanceOf::Choose(alts))
    }

    fn bracket_unit(&mut self) -> Result<UnitAst, LangError> {
        let span = self.expect(Tok::LBracket, "`[`")?;
        if matches!(self.peek(), Tok::RBracket) {
            self.bump();
            return Ok(UnitAst::Atoms(Vec::new(), span));
        }
        if self.is_kw("Nat") {
            self.bump();
            self.expect(Tok::RBracket, "`]`")?;
            return Ok(UnitAst::Nat);
        }
        let mut atoms = Vec::new();
        let mut sign = 1;
        loop {
            let name = match self.peek().clone() {
                Tok::Ident(s) => {
                    self.bump();
                    s
                }
                Tok::Number(x) if x == 1.0 && atoms.is_empty() => {
                    // `1/s`
                    self.bump();
                    if !matches!(self.peek(), Tok::Slash) {
                        return Err(self.unexpected("`/` after `1` in a unit"));
                    }
                    self.bump();
                    sign = -1;
                    continue;
                }
                _ => return Err(self.unexpected("a unit name")),
            };
            let mut e = 1;
            if matches!(self.peek(), Tok::Caret) {
                self.bump();
                match self.bump() {
                    (Tok::Number(x), _) if x.fract() == 0.0 && (1.0..=16.0).contains(&x) => e = x as i32,
                    (_, s) => return Err(LangError::new(ErrorKind::Syntax, s, "unit exponents must be small positive integers".into())),
                }
            }
            atoms.push((name, sign * e));
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    sign = 1;
                }
                Tok::Slash => {
                    self.bump();
                    sign = -1;
                }
                Tok::RBracket => {
                    self.bump();
                    return Ok(UnitAst::Atoms(atoms, span));
                }
                _ => return Err(self.unexpected("`*`, `/` or `]` in a unit")),
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        let first = self.term()?;
        if !matches!(self.peek(), Tok::Plus) {
            return Ok(first);
        }
        let span = first.span;
        let mut terms = vec![first];
        while matches!(self.peek(), Tok::Plus) {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(Expr { kind: ExprKind::Sum(terms), span })
    }

    fn term(&mut self) -> Result<Expr, LangError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.power()?;
                    let span = acc.span;
                    acc = match acc.kind {
                        ExprKind::Product(mut fs) => {
                            fs.push(rhs);
                            Expr { kind: ExprKind::Product(fs), span }
                        }
                        k => Expr { kind: ExprKind::Product(vec![Expr { kind: k, span }, rhs]), span },
                    };
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.power()?;
                    let span = acc.span;
                    acc = Expr { kind: ExprKind::Div(Box::new(acc), Box::new(rhs)), span };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, LangError> {
        let base = self.atom()?;
        if !matches!(self.peek(), Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            (Tok::Number(p), _) if p > 0.0 => {
                let span = base.span;
                Ok(Expr { kind: ExprKind::Pow(Box::new(base), p), span })
            }
            (_, s) => Err(LangError::new(ErrorKind::Syntax, s, "exponents must be positive number literals".into())),
        }
    }

    fn atom(&mut self) -> Result<Expr, LangError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(value) => {
                self.bump();
                let unit = match self.peek().clone() {
                    Tok::LBracket => Some(self.bracket_unit()?),
                    // A bare unit atom binds only on the same line, so statements stay separable.
                    Tok::Ident(u) if is_atom(&u) && self.span().line == span.line => {
                        let s = self.bump().1;
                        Some(UnitAst::Atoms(vec![(u, 1)], s))
                    }
                    _ => None,
                };
                Ok(Expr { kind: ExprKind::Number { value, unit }, span })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if FUNCTIONS.contains(&name.as_str()) && matches!(self.peek_at(1), Tok::LParen) => {
                self.bump();
                self.bump();
                let mut args = vec![self.expr()?];
                while matches!(self.peek(), Tok::Comma) {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr { kind: ExprKind::Call(name, args), span })
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident("an expression")?;
                let side = if self.is_kw("required") {
                    Some(PortSide::Required)
                } else if self.is_kw("provided") {
                    Some(PortSide::Provided)
                } else {
                    None
                };
                match side {
                    Some(side) => {
                        self.bump();
                        self.expect_kw("by")?;
                        let (instance, _) = self.ident("an instance name")?;
                        Ok(Expr { kind: ExprKind::Port { port: name, side, instance }, span })
                    }
                    None => Ok(Expr { kind: ExprKind::Name(name), span }),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
