use crate::algebra::{AggFunc, BinaryOp};
use crate::rma::OpCode;

use super::ast::{
    is_reserved, Expr, FromItem, JoinKind, OrderItem, Query, RmaArgAst, RmaCallAst, SelectItem,
    Span,
};
use super::lexer::{tokenize, Tok, Token};
use super::{Phase, SqlError};

/// Parses one SELECT statement. A trailing semicolon is optional.
pub fn parse(text: &str) -> Result<Query, SqlError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0 };
    let q = p.query()?;
    p.accept(&Tok::Semicolon);
    p.expect_eof()?;
    Ok(q)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        Span(self.tokens[self.at].pos)
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.at].tok.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> SqlError {
        SqlError::new(
            Phase::Parse,
            format!("expected {expected}, found {}", self.peek()),
            Some(self.tokens[self.at].pos),
        )
    }

    fn accept(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), SqlError> {
        if self.accept(t) {
            Ok(())
        } else {
            Err(self.error(&t.to_string()))
        }
    }

    fn is_keyword_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn is_keyword(&self, kw: &str) -> bool {
        self.is_keyword_at(0, kw)
    }

    fn accept_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.accept_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(kw))
        }
    }

    fn expect_eof(&self) -> Result<(), SqlError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of statement"))
        }
    }

    fn is_ident_at(&self, k: usize) -> bool {
        match self.peek_at(k) {
            Tok::Word(w) => !is_reserved(w),
            Tok::Quoted(_) => true,
            _ => false,
        }
    }

    fn ident(&mut self) -> Result<String, SqlError> {
        if self.is_ident_at(0) {
            match self.advance() {
                Tok::Word(w) | Tok::Quoted(w) => Ok(w),
                _ => unreachable!(),
            }
        } else {
            Err(self.error("identifier"))
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, SqlError> {
        let mut v = vec![self.ident()?];
        while self.accept(&Tok::Comma) {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn query(&mut self) -> Result<Query, SqlError> {
        let span = self.span();
        self.expect_keyword("SELECT")?;
        let mut select = vec![self.select_item()?];
        while self.accept(&Tok::Comma) {
            select.push(self.select_item()?);
        }
        self.expect_keyword("FROM")?;
        let from = self.table_list()?;
        let filter = if self.accept_keyword("WHERE") {
            Some(self.expr()?)
        } else {
            None
        };
        let mut group_by = Vec::new();
        if self.accept_keyword("GROUP") {
            self.expect_keyword("BY")?;
            loop {
                group_by.push(self.column_ref()?);
                if !self.accept(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut order_by = Vec::new();
        if self.accept_keyword("ORDER") {
            self.expect_keyword("BY")?;
            loop {
                let span = self.span();
                let name = self.ident()?;
                let descending = if self.accept_keyword("DESC") {
                    true
                } else {
                    self.accept_keyword("ASC");
                    false
                };
                order_by.push(OrderItem {
                    name,
                    descending,
                    span,
                });
                if !self.accept(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(Query {
            select,
            from,
            filter,
            group_by,
            order_by,
            span,
        })
    }

    fn select_item(&mut self) -> Result<SelectItem, SqlError> {
        let span = self.span();
        if self.accept(&Tok::Star) {
            return Ok(SelectItem::Star(span));
        }
        if self.is_ident_at(0) && *self.peek_at(1) == Tok::Dot && *self.peek_at(2) == Tok::Star {
            let q = self.ident()?;
            self.advance();
            self.advance();
            return Ok(SelectItem::QualifiedStar(q, span));
        }
        let expr = self.expr()?;
        let alias = self.alias()?;
        Ok(SelectItem::Expr { expr, alias })
    }

    fn alias(&mut self) -> Result<Option<String>, SqlError> {
        if self.accept_keyword("AS") {
            return self.ident().map(Some);
        }
        if self.is_ident_at(0) {
            return self.ident().map(Some);
        }
        Ok(None)
    }

    fn table_list(&mut self) -> Result<FromItem, SqlError> {
        let mut left = self.table_item()?;
        loop {
            let span = self.span();
            let kind = if self.accept(&Tok::Comma) {
                JoinKind::Comma
            } else if self.is_keyword("CROSS") {
                self.advance();
                self.expect_keyword("JOIN")?;
                JoinKind::Cross
            } else if self.is_keyword("JOIN") || self.is_keyword("INNER") {
                if self.accept_keyword("INNER") {
                    self.expect_keyword("JOIN")?;
                } else {
                    self.advance();
                }
                let right = self.table_item()?;
                let kind = if self.accept_keyword("ON") {
                    JoinKind::On(self.expr()?)
                } else if self.accept_keyword("USING") {
                    self.expect(&Tok::LParen)?;
                    let cols = self.ident_list()?;
                    self.expect(&Tok::RParen)?;
                    JoinKind::Using(cols)
                } else {
                    return Err(self.error("ON or USING"));
                };
                left = FromItem::Join {
                    left: Box::new(left),
                    right: Box::new(right),
                    kind,
                    span,
                };
                continue;
            } else {
                return Ok(left);
            };
            let right = self.table_item()?;
            left = FromItem::Join {
                left: Box::new(left),
                right: Box::new(right),
                kind,
                span,
            };
        }
    }

    fn table_item(&mut self) -> Result<FromItem, SqlError> {
        let span = self.span();
        if self.accept(&Tok::LParen) {
            let query = self.query()?;
            self.expect(&Tok::RParen)?;
            self.accept_keyword("AS");
            let alias = self
                .ident()
                .map_err(|_| self.error("an alias for the derived table"))?;
            return Ok(FromItem::Subquery {
                query: Box::new(query),
                alias,
                span,
            });
        }
        let rma = match self.peek() {
            Tok::Word(w) if *self.peek_at(1) == Tok::LParen => OpCode::parse(w),
            _ => None,
        };
        if let Some(op) = rma {
            self.advance();
            self.advance();
            let mut args = vec![self.rma_arg()?];
            while self.accept(&Tok::Comma) {
                args.push(self.rma_arg()?);
            }
            let context = if self.accept_keyword("NAMED") {
                Some(self.ident()?)
            } else {
                None
            };
            self.expect(&Tok::RParen)?;
            let alias = self.alias()?;
            return Ok(FromItem::Rma {
                call: RmaCallAst {
                    op,
                    args,
                    context,
                    span,
                },
                alias,
            });
        }
        let name = self
            .ident()
            .map_err(|_| self.error("table name, subquery or matrix operation"))?;
        let alias = self.alias()?;
        Ok(FromItem::Table { name, alias, span })
    }

    fn rma_arg(&mut self) -> Result<RmaArgAst, SqlError> {
        let item = self.table_item()?;
        self.expect_keyword("BY")?;
        let mut order = vec![self.ident()?];
        // a comma either continues the order list or starts the next
        // argument; an identifier followed by `,`, `)` or NAMED continues
        while *self.peek() == Tok::Comma
            && self.is_ident_at(1)
            && (matches!(self.peek_at(2), Tok::Comma | Tok::RParen)
                || self.is_keyword_at(2, "NAMED"))
        {
            self.advance();
            order.push(self.ident()?);
        }
        Ok(RmaArgAst { item, order })
    }

    fn column_ref(&mut self) -> Result<Expr, SqlError> {
        let span = self.span();
        let first = self.ident()?;
        if self.accept(&Tok::Dot) {
            let name = self.ident()?;
            Ok(Expr::Column {
                qualifier: Some(first),
                name,
                span,
            })
        } else {
            Ok(Expr::Column {
                qualifier: None,
                name: first,
                span,
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.and_expr()?;
        while self.accept_keyword("OR") {
            let right = self.and_expr()?;
            left = binary(BinaryOp::Or, left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.not_expr()?;
        while self.accept_keyword("AND") {
            let right = self.not_expr()?;
            left = binary(BinaryOp::And, left, right);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, SqlError> {
        if self.accept_keyword("NOT") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, SqlError> {
        let left = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::NotEq,
            Tok::Lt => BinaryOp::Lt,
            Tok::Gt => BinaryOp::Gt,
            Tok::LtEq => BinaryOp::LtEq,
            Tok::GtEq => BinaryOp::GtEq,
            _ => return Ok(left),
        };
        self.advance();
        let right = self.additive()?;
        Ok(binary(op, left, right))
    }

    fn additive(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.multiplicative()?;
            left = binary(op, left, right);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.unary()?;
            left = binary(op, left, right);
        }
    }

    fn unary(&mut self) -> Result<Expr, SqlError> {
        if self.accept(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SqlError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.advance();
                Ok(Expr::Int(i))
            }
            Tok::Float(x) => {
                self.advance();
                Ok(Expr::Float(x))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Str(s))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("TRUE") => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("FALSE") => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            Tok::Word(w) if *self.peek_at(1) == Tok::LParen => {
                let Some(func) = AggFunc::parse(&w) else {
                    return Err(SqlError::new(
                        Phase::Parse,
                        format!("unknown function '{w}'"),
                        Some(span.0),
                    ));
                };
                self.advance();
                self.advance();
                let arg = if func == AggFunc::Count && self.accept(&Tok::Star) {
                    None
                } else {
                    Some(Box::new(self.expr()?))
                };
                self.expect(&Tok::RParen)?;
                Ok(Expr::Agg { func, arg, span })
            }
            _ if self.is_ident_at(0) => self.column_ref(),
            _ => Err(self.error("expression")),
        }
    }
}

fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
    Expr::Binary {
        op,
        left: Box::new(left),
        right: Box::new(right),
    }
}
