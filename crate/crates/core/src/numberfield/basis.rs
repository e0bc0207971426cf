use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{
    format_rational, hp, parse_rational, rat_to_f64, rational_bits, AlgebraicScalar,
    NumberFieldError, Rational, Result,
};

/// Numeric stand-in for a symbol treated as algebraically independent.
#[derive(Debug, Clone)]
pub enum FreeWitness {
    Algebraic(AlgebraicScalar),
    Decimal(Rational),
}

#[derive(Debug, Clone)]
pub enum SymbolKind {
    Unit,
    Algebraic(AlgebraicScalar),
    Free(FreeWitness),
    /// Product of two earlier symbols, by index.
    Product(usize, usize),
}

#[derive(Debug, Clone)]
pub struct BasisSymbol {
    pub name: String,
    pub kind: SymbolKind,
    pub value: f64,
}

/// Exact element of the ℚ-span of a coordinate basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisScalar(pub Vec<Rational>);

impl BasisScalar {
    pub fn zero(s: usize) -> Self {
        BasisScalar(vec![Rational::zero(); s])
    }

    pub fn from_rational(r: Rational, s: usize) -> Self {
        let mut v = Self::zero(s);
        v.0[0] = r;
        v
    }

    pub fn from_int(n: i64, s: usize) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)), s)
    }

    pub fn unit(k: usize, s: usize) -> Self {
        let mut v = Self::zero(s);
        v.0[k] = Rational::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// The rational value when only the unit coefficient is nonzero.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.0[1..].iter().all(|c| c.is_zero()).then(|| &self.0[0])
    }

    pub fn scale(&self, r: &Rational) -> Self {
        BasisScalar(self.0.iter().map(|c| c * r).collect())
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(values)
            .map(|(c, v)| rat_to_f64(c) * v)
            .sum()
    }

    pub fn eval_exact(&self, values: &[Rational]) -> Rational {
        self.0
            .iter()
            .zip(values)
            .map(|(c, v)| c * v)
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn max_bits(&self) -> u64 {
        self.0.iter().map(rational_bits).max().unwrap_or(0)
    }
}

impl std::ops::Add for &BasisScalar {
    type Output = BasisScalar;
    fn add(self, rhs: &BasisScalar) -> BasisScalar {
        BasisScalar(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Sub for &BasisScalar {
    type Output = BasisScalar;
    fn sub(self, rhs: &BasisScalar) -> BasisScalar {
        BasisScalar(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl std::ops::Neg for &BasisScalar {
    type Output = BasisScalar;
    fn neg(self) -> BasisScalar {
        BasisScalar(self.0.iter().map(|a| -a).collect())
    }
}

/// Ordered real basis β_0 = 1, β_1, ..., β_{s-1} with a partial product table.
#[derive(Debug, Clone)]
pub struct CoordinateBasis {
    symbols: Vec<BasisSymbol>,
    index: HashMap<String, usize>,
    products: BTreeMap<(usize, usize), BasisScalar>,
    values: Vec<f64>,
}

impl PartialEq for CoordinateBasis {
    fn eq(&self, other: &Self) -> bool {
        self.names().eq(other.names()) && self.products == other.products
    }
}

#[derive(Debug, Default)]
pub struct CoordinateBasisBuilder {
    symbols: Vec<(String, SymbolKind)>,
    relations: Vec<(String, String, String)>,
    products: Vec<(String, String, String)>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => chars.all(|c| c.is_alphanumeric() || c == '_'),
        _ => false,
    }
}

impl CoordinateBasisBuilder {
    pub fn algebraic(mut self, name: &str, scalar: AlgebraicScalar) -> Self {
        self.symbols
            .push((name.to_string(), SymbolKind::Algebraic(scalar)));
        self
    }

    pub fn free(mut self, name: &str, witness: FreeWitness) -> Self {
        self.symbols
            .push((name.to_string(), SymbolKind::Free(witness)));
        self
    }

    /// Declares `name = lhs * rhs` as a new basis symbol.
    pub fn product(mut self, name: &str, lhs: &str, rhs: &str) -> Self {
        self.products
            .push((name.to_string(), lhs.to_string(), rhs.to_string()));
        self.symbols.push((
            name.to_string(),
            SymbolKind::Product(usize::MAX, usize::MAX),
        ));
        self
    }

    /// Declares `lhs * rhs = expr` with `expr` linear over the basis.
    pub fn relation(mut self, lhs: &str, rhs: &str, expr: &str) -> Self {
        self.relations
            .push((lhs.to_string(), rhs.to_string(), expr.to_string()));
        self
    }

    pub fn build(self) -> Result<CoordinateBasis> {
        let mut symbols = vec![BasisSymbol {
            name: "1".into(),
            kind: SymbolKind::Unit,
            value: 1.0,
        }];
        let mut index = HashMap::new();
        index.insert("1".to_string(), 0usize);
        let mut pending_products = self.products.into_iter();
        for (name, kind) in self.symbols {
            if !valid_name(&name) {
                return Err(NumberFieldError::InvalidSymbolName(name));
            }
            if index.contains_key(&name) {
                return Err(NumberFieldError::DuplicateSymbol(name));
            }
            let lookup = |n: &str| {
                index
                    .get(n)
                    .copied()
                    .ok_or_else(|| NumberFieldError::UnknownSymbol(n.into()))
            };
            let (kind, value) = match kind {
                SymbolKind::Algebraic(a) => {
                    if a.minpoly().degree() < 2 {
                        return Err(NumberFieldError::Dimension(format!(
                            "symbol '{name}' is rational and cannot be a basis element"
                        )));
                    }
                    let v = a.real_value().ok_or(NumberFieldError::NonReal)?;
                    (SymbolKind::Algebraic(a), v)
                }
                SymbolKind::Free(w) => {
                    let v = match &w {
                        FreeWitness::Algebraic(a) => {
                            a.real_value().ok_or(NumberFieldError::NonReal)?
                        }
                        FreeWitness::Decimal(r) => rat_to_f64(r),
                    };
                    (SymbolKind::Free(w), v)
                }
                SymbolKind::Product(..) => {
                    let (_, l, r) = pending_products.next().expect("product entry recorded");
                    let (li, ri) = (lookup(&l)?, lookup(&r)?);
                    if li == 0 || ri == 0 {
                        return Err(NumberFieldError::Dimension(format!(
                            "product symbol '{name}' must multiply two non-unit symbols"
                        )));
                    }
                    (
                        SymbolKind::Product(li, ri),
                        symbols[li].value * symbols[ri].value,
                    )
                }
                SymbolKind::Unit => unreachable!("unit is implicit"),
            };
            index.insert(name.clone(), symbols.len());
            symbols.push(BasisSymbol { name, kind, value });
        }
        let s = symbols.len();
        let values: Vec<f64> = symbols.iter().map(|sym| sym.value).collect();
        let mut basis = CoordinateBasis {
            symbols,
            index,
            products: BTreeMap::new(),
            values,
        };

        for k in 0..s {
            match &basis.symbols[k].kind {
                SymbolKind::Product(l, r) => {
                    basis.insert_product(*l, *r, BasisScalar::unit(k, s))?;
                }
                SymbolKind::Algebraic(a) if a.minpoly().degree() == 2 => {
                    let c = a.minpoly().coeffs();
                    let mut sq = BasisScalar::zero(s);
                    sq.0[0] = Rational::from_integer(BigInt::from(-c[0]));
                    sq.0[k] = Rational::from_integer(BigInt::from(-c[1]));
                    basis.insert_product(k, k, sq)?;
                }
                _ => {}
            }
        }
        for (l, r, expr) in self.relations {
            let li = basis.lookup(&l)?;
            let ri = basis.lookup(&r)?;
            let value = basis.parse(&expr)?;
            if li != 0 && ri != 0 {
                basis.insert_product(li, ri, value)?;
            }
        }
        basis.verify_products()?;
        Ok(basis)
    }
}

impl CoordinateBasis {
    pub fn builder() -> CoordinateBasisBuilder {
        CoordinateBasisBuilder::default()
    }

    /// The one-element basis {1}.
    pub fn rational() -> Self {
        CoordinateBasisBuilder::default()
            .build()
            .expect("trivial basis")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[BasisSymbol] {
        &self.symbols
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.name.as_str())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| NumberFieldError::UnknownSymbol(name.to_string()))
    }

    pub fn product(&self, i: usize, j: usize) -> Option<&BasisScalar> {
        self.products.get(&(i.min(j), i.max(j)))
    }

    pub fn product_table(&self) -> impl Iterator<Item = (usize, usize, &BasisScalar)> {
        self.products.iter().map(|(&(i, j), v)| (i, j, v))
    }

    /// Free symbols are those declared algebraically independent of the rest.
    pub fn is_free(&self, k: usize) -> bool {
        matches!(self.symbols[k].kind, SymbolKind::Free(_))
    }

    fn insert_product(&mut self, i: usize, j: usize, value: BasisScalar) -> Result<()> {
        let key = (i.min(j), i.max(j));
        if let Some(existing) = self.products.get(&key) {
            if *existing != value {
                let residual =
                    (existing.eval_f64(&self.values) - value.eval_f64(&self.values)).abs();
                return Err(NumberFieldError::ProductMismatch {
                    lhs: self.symbols[i].name.clone(),
                    rhs: self.symbols[j].name.clone(),
                    residual,
                });
            }
        }
        self.products.insert(key, value);
        Ok(())
    }

    fn verify_products(&self) -> Result<()> {
        for (&(i, j), v) in &self.products {
            let lhs = self.values[i] * self.values[j];
            let rhs = v.eval_f64(&self.values);
            let residual = (lhs - rhs).abs();
            if residual > 1e-12 * lhs.abs().max(1.0) {
                return Err(NumberFieldError::ProductMismatch {
                    lhs: self.symbols[i].name.clone(),
                    rhs: self.symbols[j].name.clone(),
                    residual,
                });
            }
        }
        Ok(())
    }

    /// Basis values to within `2^-bits`; free decimal witnesses are exact.
    pub fn hp_values(&self, bits: u32) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::with_capacity(self.len());
        for sym in &self.symbols {
            let v = match &sym.kind {
                SymbolKind::Unit => Rational::one(),
                SymbolKind::Algebraic(a) | SymbolKind::Free(FreeWitness::Algebraic(a)) => {
                    a.hp_value(bits + 16).expect("basis symbols are real")
                }
                SymbolKind::Free(FreeWitness::Decimal(r)) => r.clone(),
                SymbolKind::Product(l, r) => hp::to_dyadic(&(&out[*l] * &out[*r]), bits + 16),
            };
            out.push(v);
        }
        out
    }

    pub fn mul(&self, a: &BasisScalar, b: &BasisScalar) -> Result<BasisScalar> {
        let s = self.len();
        if let Some(r) = a.as_rational() {
            return Ok(b.scale(r));
        }
        if let Some(r) = b.as_rational() {
            return Ok(a.scale(r));
        }
        let mut out = BasisScalar::zero(s);
        for (i, ai) in a.0.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (j, bj) in b.0.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                let coeff = ai * bj;
                if i == 0 || j == 0 {
                    let k = i.max(j);
                    out.0[k] += coeff;
                    continue;
                }
                let prod = self
                    .product(i, j)
                    .ok_or_else(|| NumberFieldError::MissingProduct {
                        lhs: self.symbols[i].name.clone(),
                        rhs: self.symbols[j].name.clone(),
                    })?;
                for (k, c) in prod.0.iter().enumerate() {
                    if !c.is_zero() {
                        out.0[k] += &coeff * c;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn parse(&self, input: &str) -> Result<BasisScalar> {
        let tokens = tokenize(input)?;
        let mut p = Parser {
            basis: self,
            tokens,
            pos: 0,
            input,
        };
        let v = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(v)
    }

    pub fn format(&self, x: &BasisScalar) -> String {
        let mut out = String::new();
        for (k, c) in x.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            let body = if k == 0 {
                format_rational(&mag)
            } else if mag.is_one() {
                self.symbols[k].name.clone()
            } else {
                format!("{}*{}", format_rational(&mag), self.symbols[k].name)
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for CoordinateBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.names().collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token::Num(parse_rational(&text)?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(NumberFieldError::Parse {
                input: input.to_string(),
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    basis: &'a CoordinateBasis,
    tokens: Vec<Token>,
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> NumberFieldError {
        NumberFieldError::Parse {
            input: self.input.to_string(),
            msg: msg.to_string(),
        }
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<BasisScalar> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BasisScalar> {
        let mut acc = self.unary()?;
        loop {
            match self.tokens.get(self.pos) {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.basis.mul(&acc, &rhs)?;
                }
                Some(Token::Op('/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let r = rhs
                        .as_rational()
                        .ok_or_else(|| self.error("division by a non-rational"))?;
                    if r.is_zero() {
                        return Err(self.error("division by zero"));
                    }
                    acc = acc.scale(&r.recip());
                }
                Some(Token::Ident(_)) | Some(Token::Op('(')) => {
                    let rhs = self.power()?;
                    acc = self.basis.mul(&acc, &rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BasisScalar> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BasisScalar> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let exp = match self.tokens.get(self.pos) {
            Some(Token::Num(n)) if n.is_integer() && !n.is_negative() => n.to_integer(),
            _ => return Err(self.error("exponent must be a non-negative integer")),
        };
        self.pos += 1;
        let exp: u32 = exp
            .try_into()
            .map_err(|_| self.error("exponent too large"))?;
        let mut acc = BasisScalar::from_int(1, self.basis.len());
        for _ in 0..exp {
            acc = self.basis.mul(&acc, &base)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<BasisScalar> {
        let s = self.basis.len();
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(r)) => {
                self.pos += 1;
                Ok(BasisScalar::from_rational(r, s))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let k = self.basis.lookup(&name)?;
                Ok(BasisScalar::unit(k, s))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.error("missing ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("expected a number, symbol or '('")),
        }
    }
}
