//! 3-CNF formulas: DIMACS ingestion, normalization into the shape the
//! reduction expects, and a brute-force satisfiability oracle.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Largest variable count accepted by [`brute_force_sat`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("clause {clause} is unsatisfiable after removing duplicates and tautologies")]
    UnsatisfiableClause { clause: usize },
    #[error("brute force refused: {n} variables exceeds the limit of {limit}")]
    TooManyVariables { n: usize, limit: usize },
    #[error("variable x{var} does not occur in clause {clause}")]
    NotInClause { var: usize, clause: usize },
    #[error("assignment line {line}: {msg}")]
    Assignment { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Self {
        Literal { var, positive }
    }

    pub fn negated(self) -> Self {
        Literal { var: self.var, positive: !self.positive }
    }

    /// DIMACS integer: 1-based, sign carries polarity.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn eval(self, a: &Assignment) -> bool {
        a.value(self.var) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "¬x{}", self.var)
        }
    }
}

/// A disjunction of literals. Parsed clauses may have any length; normalized
/// clauses have exactly three literals over distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.literals.iter().any(|l| l.var == var)
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        self.literals.iter().any(|l| l.eval(a))
    }

    fn is_conforming(&self) -> bool {
        self.literals.len() == 3
            && self.literals[0].var != self.literals[1].var
            && self.literals[0].var != self.literals[2].var
            && self.literals[1].var != self.literals[2].var
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.literals.iter().enumerate() {
            if k > 0 {
                write!(f, "∨")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    pub variable_count: usize,
    pub clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(variable_count: usize, clauses: Vec<Clause>) -> Self {
        Formula { variable_count, clauses }
    }

    /// Number of clauses containing each variable.
    pub fn occurrence_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.variable_count];
        for c in &self.clauses {
            let mut seen: Vec<usize> = c.literals.iter().map(|l| l.var).collect();
            seen.sort_unstable();
            seen.dedup();
            for v in seen {
                counts[v] += 1;
            }
        }
        counts
    }

    /// Ascending clause indices that mention `var`.
    pub fn clauses_of(&self, var: usize) -> Vec<usize> {
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains_var(var))
            .map(|(d, _)| d)
            .collect()
    }

    /// Every clause has three distinct variables and every variable that
    /// occurs at all occurs in at least two clauses.
    pub fn is_conforming(&self) -> bool {
        self.clauses.iter().all(Clause::is_conforming)
            && self.occurrence_counts().iter().all(|&c| c == 0 || c >= 2)
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.eval(a))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.variable_count, self.clauses.len());
        for c in &self.clauses {
            for l in &c.literals {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "⊤");
        }
        for (d, c) in self.clauses.iter().enumerate() {
            if d > 0 {
                write!(f, "∧")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A total truth assignment, indexed by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all_false(n: usize) -> Self {
        Assignment { values: vec![false; n] }
    }

    /// Unlisted variables read as false.
    pub fn value(&self, var: usize) -> bool {
        self.values.get(var).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One `x<i> true|false` line per variable.
    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("x{i} {v}\n"))
            .collect()
    }

    pub fn parse_text(text: &str) -> Result<Self, FormulaError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| FormulaError::Assignment { line: k + 1, msg: msg.to_string() };
            let mut parts = line.split_whitespace();
            let name = parts.next().ok_or_else(|| err("empty line"))?;
            let value = parts.next().ok_or_else(|| err("missing value"))?;
            if parts.next().is_some() {
                return Err(err("trailing tokens"));
            }
            let var: usize = name
                .strip_prefix('x')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("expected x<i>"))?;
            let value = match value {
                "true" => true,
                "false" => false,
                _ => return Err(err("expected true or false")),
            };
            if map.insert(var, value).is_some() {
                return Err(err("variable listed twice"));
            }
        }
        let n = map.keys().next_back().map_or(0, |&v| v + 1);
        if map.len() != n {
            return Err(FormulaError::Assignment {
                line: 0,
                msg: format!("assignment must list x0..x{} without gaps", n.saturating_sub(1)),
            });
        }
        Ok(Assignment { values: map.into_values().collect() })
    }
}

/// Parse DIMACS CNF. Literal order is kept and nothing is normalized.
pub fn parse_dimacs(text: &str) -> Result<Formula, FormulaError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut open_since = 0usize;
    let mut last_line = 0usize;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let perr = |msg: String| FormulaError::Parse { line: line_no, msg };
        if line.starts_with('p') {
            if header.is_some() {
                return Err(perr("duplicate header".into()));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(perr(format!("malformed header {line:?}")));
            }
            let n = toks[2].parse().map_err(|_| perr(format!("bad variable count {:?}", toks[2])))?;
            let m = toks[3].parse().map_err(|_| perr(format!("bad clause count {:?}", toks[3])))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| perr("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| perr(format!("bad literal {tok:?}")))?;
            if x == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                continue;
            }
            let var = x.unsigned_abs() as usize;
            if var > n {
                return Err(perr(format!("literal {x} out of range (n = {n})")));
            }
            if current.is_empty() {
                open_since = line_no;
            }
            current.push(Literal::new(var - 1, x > 0));
        }
    }

    let (n, m) = header.ok_or(FormulaError::Parse { line: last_line.max(1), msg: "missing header".into() })?;
    if !current.is_empty() {
        return Err(FormulaError::Parse { line: open_since, msg: "clause missing terminating 0".into() });
    }
    if clauses.len() != m {
        return Err(FormulaError::Parse {
            line: last_line.max(1),
            msg: format!("header declares {m} clauses, found {}", clauses.len()),
        });
    }
    Ok(Formula::new(n, clauses))
}

/// Bring a formula into reduction shape: three distinct variables per
/// clause, every occurring variable in at least two clauses.
///
/// Steps, in order: drop repeated literals, drop tautologies, pad short
/// clauses with fresh variables (both polarities), and duplicate a clause
/// for each variable that occurs exactly once. Conforming input is
/// returned unchanged.
pub fn normalize(f: &Formula) -> Result<Formula, FormulaError> {
    let mut n = f.variable_count;
    let mut step2: Vec<Vec<Literal>> = Vec::new();
    for (d, c) in f.clauses.iter().enumerate() {
        let mut lits: Vec<Literal> = Vec::with_capacity(c.literals.len());
        for &l in &c.literals {
            if !lits.contains(&l) {
                lits.push(l);
            }
        }
        if lits.is_empty() {
            return Err(FormulaError::UnsatisfiableClause { clause: d });
        }
        let tautology = lits.iter().any(|l| lits.contains(&l.negated()));
        if !tautology {
            step2.push(lits);
        }
    }

    let mut clauses: Vec<Clause> = Vec::new();
    for lits in step2 {
        match lits.len() {
            3 => clauses.push(Clause::new(lits)),
            2 => {
                let y = n;
                n += 1;
                for pos in [true, false] {
                    let mut c = lits.clone();
                    c.push(Literal::new(y, pos));
                    clauses.push(Clause::new(c));
                }
            }
            1 => {
                let (y1, y2) = (n, n + 1);
                n += 2;
                for p1 in [true, false] {
                    for p2 in [true, false] {
                        clauses.push(Clause::new(vec![lits[0], Literal::new(y1, p1), Literal::new(y2, p2)]));
                    }
                }
            }
            // more than three distinct variables: outside 3-CNF, kept for the
            // conformance check to reject downstream
            _ => clauses.push(Clause::new(lits)),
        }
    }

    let mut out = Formula::new(n, clauses);
    loop {
        let counts = out.occurrence_counts();
        let Some(var) = counts.iter().position(|&c| c == 1) else { break };
        let d = out.clauses.iter().position(|c| c.contains_var(var)).expect("counted occurrence");
        let dup = out.clauses[d].clone();
        out.clauses.push(dup);
    }
    Ok(out)
}

/// Lexicographically first satisfying assignment (x0 most significant,
/// false before true), or `None`.
pub fn brute_force_sat(f: &Formula) -> Result<Option<Assignment>, FormulaError> {
    let n = f.variable_count;
    if n > BRUTE_FORCE_LIMIT {
        return Err(FormulaError::TooManyVariables { n, limit: BRUTE_FORCE_LIMIT });
    }
    for mask in 0u64..(1u64 << n) {
        let a = Assignment::new((0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect());
        if f.is_satisfied_by(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// All satisfying assignments in lexicographic order.
pub fn all_satisfying(f: &Formula) -> Result<Vec<Assignment>, FormulaError> {
    let n = f.variable_count;
    if n > BRUTE_FORCE_LIMIT {
        return Err(FormulaError::TooManyVariables { n, limit: BRUTE_FORCE_LIMIT });
    }
    Ok((0u64..(1u64 << n))
        .map(|mask| Assignment::new((0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect()))
        .filter(|a| f.is_satisfied_by(a))
        .collect())
}

/// Rank of clause `d` among the clauses containing `var`, ascending by index.
pub fn occurrence_index(f: &Formula, var: usize, d: usize) -> Result<usize, FormulaError> {
    let not_in = FormulaError::NotInClause { var, clause: d };
    match f.clauses.get(d) {
        Some(c) if c.contains_var(var) => {}
        _ => return Err(not_in),
    }
    Ok(f.clauses[..d].iter().filter(|c| c.contains_var(var)).count())
}
