//! Deterministic finite automata over small abstract alphabets.
//!
//! Constraint automata never range over the full transition set of a model.
//! Each one distinguishes only its own parameters plus a single `OTHER` class
//! that stands for every other transition, so the alphabets handled here have
//! at most a handful of classes.
//!
//! [`compile_regex`] turns a restricted regular expression into a complete,
//! minimal DFA whose dead states are merged into one absorbing sink and whose
//! states are labelled with a [`TruthStatus`].

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Dense index of an automaton state.
pub type StateId = u32;

/// Upper bound accepted for `{n}` repetitions.
pub const MAX_REPETITION: u32 = 32;

/// Upper bound accepted by [`Fsa::enumerate_language`].
pub const MAX_ENUMERATION_LENGTH: usize = 8;

const MAX_PARAMS: usize = 16;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FsaError {
    #[error("malformed pattern at offset {offset}: {reason}")]
    MalformedPattern { offset: usize, reason: String },
    #[error("repetition count {0} exceeds the maximum of {MAX_REPETITION}")]
    RepetitionTooLarge(u32),
    #[error("enumeration length {0} exceeds the maximum of {MAX_ENUMERATION_LENGTH}")]
    LimitExceeded(usize),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
}

/// One letter of an abstract alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolClass(u8);

impl SymbolClass {
    pub fn id(self) -> usize {
        self.0 as usize
    }

    pub fn from_id(id: usize) -> Self {
        SymbolClass(id as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// The k-th constraint parameter (0-based).
    Param(usize),
    /// Any symbol not named by the constraint.
    Other,
}

/// Alphabet made of named parameter classes followed by exactly one `OTHER`.
///
/// Parameter names are single characters; they are the literals of the
/// pattern language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(names: I) -> Result<Self, FsaError> {
        let names: Vec<char> = names.into_iter().collect();
        if names.len() > MAX_PARAMS {
            return Err(FsaError::InvalidAlphabet(format!(
                "at most {MAX_PARAMS} parameter classes are supported"
            )));
        }
        for (idx, name) in names.iter().enumerate() {
            if !name.is_alphanumeric() {
                return Err(FsaError::InvalidAlphabet(format!("'{name}' is not alphanumeric")));
            }
            if names[..idx].contains(name) {
                return Err(FsaError::InvalidAlphabet(format!("duplicate class name '{name}'")));
            }
        }
        Ok(Alphabet { names })
    }

    /// Alphabet `{a, b, …}` with `arity` parameters plus `OTHER`.
    pub fn with_arity(arity: usize) -> Self {
        Alphabet::new((0..arity).map(|k| (b'a' + k as u8) as char)).expect("arity within bounds")
    }

    /// Number of classes, `OTHER` included.
    pub fn len(&self) -> usize {
        self.names.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn param(&self, k: usize) -> SymbolClass {
        assert!(k < self.names.len(), "parameter {k} out of range");
        SymbolClass(k as u8)
    }

    pub fn other(&self) -> SymbolClass {
        SymbolClass(self.names.len() as u8)
    }

    pub fn kind(&self, class: SymbolClass) -> ClassKind {
        if class.id() < self.names.len() {
            ClassKind::Param(class.id())
        } else {
            ClassKind::Other
        }
    }

    pub fn classes(&self) -> impl Iterator<Item = SymbolClass> + '_ {
        (0..self.len()).map(SymbolClass::from_id)
    }

    pub fn lookup(&self, name: char) -> Option<SymbolClass> {
        self.names.iter().position(|&c| c == name).map(SymbolClass::from_id)
    }

    pub fn name(&self, class: SymbolClass) -> String {
        match self.kind(class) {
            ClassKind::Param(k) => self.names[k].to_string(),
            ClassKind::Other => "OTHER".to_string(),
        }
    }

    fn full_mask(&self) -> u32 {
        (1u32 << self.len()) - 1
    }
}

/// Truth value of a constraint while it is being monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthStatus {
    PermViolation,
    TempViolation,
    TempSatisfaction,
    PermSatisfaction,
}

impl TruthStatus {
    pub fn is_accepting(self) -> bool {
        matches!(self, TruthStatus::TempSatisfaction | TruthStatus::PermSatisfaction)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TruthStatus::PermViolation => "PERM_VIOLATION",
            TruthStatus::TempViolation => "TEMP_VIOLATION",
            TruthStatus::TempSatisfaction => "TEMP_SATISFACTION",
            TruthStatus::PermSatisfaction => "PERM_SATISFACTION",
        }
    }
}

impl fmt::Display for TruthStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complete deterministic automaton with classified states.
///
/// Every state is reachable from the initial one; state 0 is always the
/// initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsa {
    alphabet: Alphabet,
    /// Row-major `state * alphabet.len() + class`.
    delta: Vec<StateId>,
    initial: StateId,
    accepting: Vec<bool>,
    status: Vec<TruthStatus>,
}

impl Fsa {
    /// Builds an automaton from an explicit transition table.
    ///
    /// `delta[s][c]` is the successor of state `s` on class `c`. Unreachable
    /// states are dropped and the remaining ones renumbered in breadth-first
    /// order from `initial`.
    pub fn from_parts(
        alphabet: Alphabet,
        delta: Vec<Vec<StateId>>,
        initial: StateId,
        accepting: Vec<bool>,
    ) -> Result<Self, FsaError> {
        let n = delta.len();
        if n == 0 {
            return Err(FsaError::InvalidAutomaton("no states".into()));
        }
        if accepting.len() != n {
            return Err(FsaError::InvalidAutomaton(format!(
                "{} acceptance flags for {n} states",
                accepting.len()
            )));
        }
        if initial as usize >= n {
            return Err(FsaError::InvalidAutomaton(format!("initial state {initial} out of range")));
        }
        for (s, row) in delta.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(FsaError::InvalidAutomaton(format!(
                    "state {s} has {} successors, expected {}",
                    row.len(),
                    alphabet.len()
                )));
            }
            if let Some(bad) = row.iter().find(|&&t| t as usize >= n) {
                return Err(FsaError::InvalidAutomaton(format!("state {s} targets unknown state {bad}")));
            }
        }
        Ok(Self::renumbered(alphabet, &delta, initial, &accepting, |s| s))
    }

    /// Quotient by `block_of` followed by BFS renumbering from the initial block.
    fn renumbered(
        alphabet: Alphabet,
        delta: &[Vec<StateId>],
        initial: StateId,
        accepting: &[bool],
        block_of: impl Fn(StateId) -> StateId,
    ) -> Self {
        let width = alphabet.len();
        let mut index: HashMap<StateId, StateId> = HashMap::new();
        let mut representatives: Vec<StateId> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(block_of(initial), 0);
        representatives.push(initial);
        queue.push_back(initial);
        let mut table: Vec<StateId> = Vec::new();
        while let Some(rep) = queue.pop_front() {
            for &target in &delta[rep as usize][..width] {
                let block = block_of(target);
                let next = *index.entry(block).or_insert_with(|| {
                    representatives.push(target);
                    queue.push_back(target);
                    (representatives.len() - 1) as StateId
                });
                table.push(next);
            }
        }
        let accepting: Vec<bool> = representatives.iter().map(|&r| accepting[r as usize]).collect();
        let mut fsa = Fsa {
            alphabet,
            delta: table,
            initial: 0,
            accepting,
            status: Vec::new(),
        };
        fsa.status = fsa.classify_states();
        fsa
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting[state as usize]
    }

    pub fn status(&self, state: StateId) -> TruthStatus {
        self.status[state as usize]
    }

    pub fn statuses(&self) -> &[TruthStatus] {
        &self.status
    }

    /// The permanent-violation state, if the automaton has exactly one.
    pub fn sink(&self) -> Option<StateId> {
        let mut dead = self
            .status
            .iter()
            .enumerate()
            .filter(|(_, st)| **st == TruthStatus::PermViolation)
            .map(|(s, _)| s as StateId);
        match (dead.next(), dead.next()) {
            (Some(s), None) => Some(s),
            _ => None,
        }
    }

    #[inline]
    pub fn step(&self, state: StateId, class: SymbolClass) -> StateId {
        self.delta[state as usize * self.alphabet.len() + class.id()]
    }

    pub fn run_from(&self, state: StateId, word: &[SymbolClass]) -> StateId {
        word.iter().fold(state, |s, &c| self.step(s, c))
    }

    pub fn accepts(&self, word: &[SymbolClass]) -> bool {
        self.is_accepting(self.run_from(self.initial, word))
    }

    fn successors(&self, state: StateId) -> &[StateId] {
        let w = self.alphabet.len();
        &self.delta[state as usize * w..(state as usize + 1) * w]
    }

    /// Recomputes the truth status of every state from reachability.
    pub fn classify_states(&self) -> Vec<TruthStatus> {
        let n = self.num_states();
        let mut predecessors: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in 0..n as StateId {
            for &t in self.successors(s) {
                predecessors[t as usize].push(s);
            }
        }

        // can_accept[s]: some accepting state is reachable from s.
        let mut can_accept = self.accepting.clone();
        let mut queue: VecDeque<StateId> = (0..n as StateId).filter(|&s| self.accepting[s as usize]).collect();
        while let Some(s) = queue.pop_front() {
            for &p in &predecessors[s as usize] {
                if !can_accept[p as usize] {
                    can_accept[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }

        // can_reject[s]: some non-accepting state is reachable from s.
        let mut can_reject: Vec<bool> = self.accepting.iter().map(|a| !a).collect();
        let mut queue: VecDeque<StateId> = (0..n as StateId).filter(|&s| can_reject[s as usize]).collect();
        while let Some(s) = queue.pop_front() {
            for &p in &predecessors[s as usize] {
                if !can_reject[p as usize] {
                    can_reject[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }

        (0..n)
            .map(|s| {
                if !can_accept[s] {
                    TruthStatus::PermViolation
                } else if !self.accepting[s] {
                    TruthStatus::TempViolation
                } else if can_reject[s] {
                    TruthStatus::TempSatisfaction
                } else {
                    TruthStatus::PermSatisfaction
                }
            })
            .collect()
    }

    fn table(&self) -> Vec<Vec<StateId>> {
        (0..self.num_states() as StateId).map(|s| self.successors(s).to_vec()).collect()
    }

    /// Merges every permanent-violation state into a single absorbing sink.
    pub fn normalize_sink(&self) -> Fsa {
        let dead: Vec<bool> = self.status.iter().map(|s| *s == TruthStatus::PermViolation).collect();
        let Some(first_dead) = dead.iter().position(|&d| d) else {
            return self.clone();
        };
        let first_dead = first_dead as StateId;
        let mut table = self.table();
        // Dead states accept nothing, so rerouting them into one self-looping
        // representative keeps the language.
        table[first_dead as usize].iter_mut().for_each(|t| *t = first_dead);
        Self::renumbered(self.alphabet.clone(), &table, self.initial, &self.accepting, |s| {
            if dead[s as usize] {
                first_dead
            } else {
                s
            }
        })
    }

    /// Moore partition refinement.
    pub fn minimize(&self) -> Fsa {
        let n = self.num_states();
        let width = self.alphabet.len();
        let mut block: Vec<u32> = self.accepting.iter().map(|&a| a as u32).collect();
        let mut count = block.iter().collect::<std::collections::BTreeSet<_>>().len();
        loop {
            let mut signatures: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
            let mut next = vec![0u32; n];
            for s in 0..n {
                let mut sig = Vec::with_capacity(width + 1);
                sig.push(block[s]);
                sig.extend(self.successors(s as StateId).iter().map(|&t| block[t as usize]));
                let fresh = signatures.len() as u32;
                next[s] = *signatures.entry(sig).or_insert(fresh);
            }
            let new_count = signatures.len();
            block = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let table = self.table();
        Self::renumbered(self.alphabet.clone(), &table, self.initial, &self.accepting, |s| block[s as usize])
    }

    /// Product automaton accepting the intersection of both languages.
    pub fn intersect(&self, other: &Fsa) -> Result<Fsa, FsaError> {
        if self.alphabet != other.alphabet {
            return Err(FsaError::InvalidAlphabet("intersection requires identical alphabets".into()));
        }
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        index.insert(pairs[0], 0);
        let mut table: Vec<Vec<StateId>> = Vec::new();
        let mut cursor = 0;
        while cursor < pairs.len() {
            let (a, b) = pairs[cursor];
            let mut row = Vec::with_capacity(self.alphabet.len());
            for class in self.alphabet.classes() {
                let target = (self.step(a, class), other.step(b, class));
                let id = *index.entry(target).or_insert_with(|| {
                    pairs.push(target);
                    (pairs.len() - 1) as StateId
                });
                row.push(id);
            }
            table.push(row);
            cursor += 1;
        }
        let accepting = pairs.iter().map(|&(a, b)| self.is_accepting(a) && other.is_accepting(b)).collect();
        Ok(Fsa::from_parts(self.alphabet.clone(), table, 0, accepting)?.minimize().normalize_sink())
    }

    /// All accepted words of length at most `max_len`, in shortlex order.
    pub fn enumerate_language(&self, max_len: usize) -> Result<Vec<Vec<SymbolClass>>, FsaError> {
        if max_len > MAX_ENUMERATION_LENGTH {
            return Err(FsaError::LimitExceeded(max_len));
        }
        let mut accepted = Vec::new();
        let mut frontier: Vec<(Vec<SymbolClass>, StateId)> = vec![(Vec::new(), self.initial)];
        for len in 0..=max_len {
            for (word, state) in &frontier {
                if self.is_accepting(*state) {
                    accepted.push(word.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::with_capacity(frontier.len() * self.alphabet.len());
            for (word, state) in &frontier {
                // Dead states contribute nothing further.
                if self.status(*state) == TruthStatus::PermViolation {
                    continue;
                }
                for class in self.alphabet.classes() {
                    let mut w = word.clone();
                    w.push(class);
                    next.push((w, self.step(*state, class)));
                }
            }
            frontier = next;
        }
        Ok(accepted)
    }
}

/// Compiles a restricted regular expression over `alphabet` into a minimal,
/// sink-normalized, classified DFA.
///
/// Grammar: class-name literals, `.`, `[ab]`, `[^ab]`, grouping, `|`, `*`,
/// `+`, `?` and `{n}` with `n <= 32`.
pub fn compile_regex(pattern: &str, alphabet: &Alphabet) -> Result<Fsa, FsaError> {
    let ast = Parser::new(pattern, alphabet).parse()?;
    let mut nfa = Nfa::default();
    let (start, end) = nfa.build(&ast);
    nfa.accept = end;
    Ok(nfa.determinize(start, alphabet).minimize().normalize_sink())
}

#[derive(Debug, Clone)]
enum Ast {
    Empty,
    Set(u32),
    Concat(Vec<Ast>),
    Alt(Vec<Ast>),
    Star(Box<Ast>),
    Plus(Box<Ast>),
    Opt(Box<Ast>),
    Repeat(Box<Ast>, u32),
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn new(pattern: &str, alphabet: &'a Alphabet) -> Self {
        Parser {
            chars: pattern.chars().collect(),
            pos: 0,
            alphabet,
        }
    }

    fn error<T>(&self, reason: impl Into<String>) -> Result<T, FsaError> {
        Err(FsaError::MalformedPattern {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Ast, FsaError> {
        let ast = self.alternation()?;
        if let Some(c) = self.peek() {
            return self.error(format!("unexpected '{c}'"));
        }
        Ok(ast)
    }

    fn alternation(&mut self) -> Result<Ast, FsaError> {
        let mut branches = vec![self.concatenation()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.concatenation()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Ast::Alt(branches)
        })
    }

    fn concatenation(&mut self) -> Result<Ast, FsaError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.repetition()?);
        }
        Ok(match items.len() {
            0 => Ast::Empty,
            1 => items.pop().unwrap(),
            _ => Ast::Concat(items),
        })
    }

    fn repetition(&mut self) -> Result<Ast, FsaError> {
        let mut ast = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    ast = Ast::Star(Box::new(ast));
                }
                Some('+') => {
                    self.pos += 1;
                    ast = Ast::Plus(Box::new(ast));
                }
                Some('?') => {
                    self.pos += 1;
                    ast = Ast::Opt(Box::new(ast));
                }
                Some('{') => {
                    self.pos += 1;
                    let start = self.pos;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    if start == self.pos {
                        return self.error("expected a repetition count");
                    }
                    let digits: String = self.chars[start..self.pos].iter().collect();
                    if self.peek() != Some('}') {
                        return self.error("expected '}'");
                    }
                    self.pos += 1;
                    let n: u32 = match digits.parse() {
                        Ok(n) => n,
                        Err(_) => return Err(FsaError::RepetitionTooLarge(u32::MAX)),
                    };
                    if n > MAX_REPETITION {
                        return Err(FsaError::RepetitionTooLarge(n));
                    }
                    ast = Ast::Repeat(Box::new(ast), n);
                }
                _ => return Ok(ast),
            }
        }
    }

    fn atom(&mut self) -> Result<Ast, FsaError> {
        let Some(c) = self.peek() else {
            return self.error("unexpected end of pattern");
        };
        match c {
            '(' => {
                self.pos += 1;
                let inner = self.alternation()?;
                if self.peek() != Some(')') {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            '.' => {
                self.pos += 1;
                Ok(Ast::Set(self.alphabet.full_mask()))
            }
            '[' => {
                self.pos += 1;
                let negated = self.peek() == Some('^');
                if negated {
                    self.pos += 1;
                }
                let mut mask = 0u32;
                loop {
                    match self.peek() {
                        None => return self.error("unterminated class"),
                        Some(']') => {
                            self.pos += 1;
                            break;
                        }
                        Some(name) => {
                            mask |= self.literal_mask(name)?;
                            self.pos += 1;
                        }
                    }
                }
                if mask == 0 {
                    return self.error("empty class");
                }
                Ok(Ast::Set(if negated { self.alphabet.full_mask() & !mask } else { mask }))
            }
            '*' | '+' | '?' | '{' => self.error(format!("dangling '{c}'")),
            _ => {
                let mask = self.literal_mask(c)?;
                self.pos += 1;
                Ok(Ast::Set(mask))
            }
        }
    }

    fn literal_mask(&self, name: char) -> Result<u32, FsaError> {
        match self.alphabet.lookup(name) {
            Some(class) => Ok(1 << class.id()),
            None => self.error(format!("'{name}' is not a class of the alphabet")),
        }
    }
}

/// Thompson automaton with epsilon moves.
#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(u32, usize)>>,
    accept: usize,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, ast: &Ast) -> (usize, usize) {
        match ast {
            Ast::Empty => {
                let s = self.state();
                (s, s)
            }
            Ast::Set(mask) => {
                let s = self.state();
                let e = self.state();
                self.edges[s].push((*mask, e));
                (s, e)
            }
            Ast::Concat(items) => {
                let (start, mut end) = self.build(&items[0]);
                for item in &items[1..] {
                    let (s, e) = self.build(item);
                    self.eps[end].push(s);
                    end = e;
                }
                (start, end)
            }
            Ast::Alt(branches) => {
                let s = self.state();
                let e = self.state();
                for branch in branches {
                    let (bs, be) = self.build(branch);
                    self.eps[s].push(bs);
                    self.eps[be].push(e);
                }
                (s, e)
            }
            Ast::Star(inner) => {
                let s = self.state();
                let e = self.state();
                let (is, ie) = self.build(inner);
                self.eps[s].push(is);
                self.eps[s].push(e);
                self.eps[ie].push(is);
                self.eps[ie].push(e);
                (s, e)
            }
            Ast::Plus(inner) => {
                let (is, ie) = self.build(inner);
                let e = self.state();
                self.eps[ie].push(is);
                self.eps[ie].push(e);
                (is, e)
            }
            Ast::Opt(inner) => {
                let s = self.state();
                let e = self.state();
                let (is, ie) = self.build(inner);
                self.eps[s].push(is);
                self.eps[s].push(e);
                self.eps[ie].push(e);
                (s, e)
            }
            Ast::Repeat(inner, n) => {
                let start = self.state();
                let mut end = start;
                for _ in 0..*n {
                    let (s, e) = self.build(inner);
                    self.eps[end].push(s);
                    end = e;
                }
                (start, end)
            }
        }
    }

    fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut seen = vec![false; self.eps.len()];
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            out.push(s);
            stack.extend(self.eps[s].iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// Subset construction. The empty subset becomes an ordinary dead state,
    /// which makes the result complete.
    fn determinize(&self, start: usize, alphabet: &Alphabet) -> Fsa {
        let mut index: HashMap<Vec<usize>, StateId> = HashMap::new();
        let first = self.closure([start]);
        let mut subsets = vec![first.clone()];
        index.insert(first, 0);
        let mut table: Vec<Vec<StateId>> = Vec::new();
        let mut cursor = 0;
        while cursor < subsets.len() {
            let mut row = Vec::with_capacity(alphabet.len());
            for class in alphabet.classes() {
                let bit = 1u32 << class.id();
                let targets = subsets[cursor]
                    .iter()
                    .flat_map(|&s| self.edges[s].iter())
                    .filter(|(mask, _)| mask & bit != 0)
                    .map(|&(_, t)| t);
                let subset = self.closure(targets);
                let id = match index.get(&subset) {
                    Some(&id) => id,
                    None => {
                        let id = subsets.len() as StateId;
                        index.insert(subset.clone(), id);
                        subsets.push(subset);
                        id
                    }
                };
                row.push(id);
            }
            table.push(row);
            cursor += 1;
        }
        let accepting = subsets.iter().map(|set| set.binary_search(&self.accept).is_ok()).collect();
        Fsa::from_parts(alphabet.clone(), table, 0, accepting).expect("subset construction yields a valid table")
    }
}
