//! Tree automata with trivial acceptance conditions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::reduction::bohm_truncate;
use crate::syntax::{Signature, SimpleType, Term};
use crate::tree::{Label, LabeledTree};

/// Sets of states as bitmasks; automata have at most 64 states.
pub type StateSet = u64;

pub const MAX_STATES: usize = 64;

/// Label under which `Ω` appears in leaf transitions.
pub const OMEGA: &str = "Omega";

/// A parsed `bin` line: line number, state, label and successor pairs.
type BinLine = (usize, String, String, Vec<(String, String)>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TacAutomaton {
    states: Vec<String>,
    init: usize,
    /// For each leaf label (including `Omega`), the states that accept it.
    leaf: BTreeMap<String, StateSet>,
    /// For each binary label, the allowed child-state pairs of each state.
    bin: BTreeMap<String, Vec<Vec<(usize, usize)>>>,
}

/// How cut leaves `ω` are treated when running on a truncated tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutPolicy {
    AcceptCuts,
    RejectCuts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleAutomaton {
    /// Trees without `Ω`.
    NoOmega,
    /// Trees whose root is not `Ω`: terms with a head normal form.
    HasHnf,
    /// Every `Ω` lies below a node labelled `err`.
    ErrBeforeOmega,
}

impl TacAutomaton {
    /// An automaton with no transitions yet; every `δ₀` is false and every `δ₂` empty.
    pub fn new(states: &[&str], init: &str) -> Result<Self> {
        if states.is_empty() || states.len() > MAX_STATES {
            return Err(Error::Automaton(format!(
                "need between 1 and {MAX_STATES} states"
            )));
        }
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        for (i, s) in names.iter().enumerate() {
            if names[..i].contains(s) {
                return Err(Error::Automaton(format!("duplicate state `{s}`")));
            }
        }
        let init = names
            .iter()
            .position(|s| s == init)
            .ok_or_else(|| Error::Automaton(format!("initial state `{init}` is not declared")))?;
        let mut leaf = BTreeMap::new();
        leaf.insert(OMEGA.to_string(), 0);
        Ok(TacAutomaton {
            states: names,
            init,
            leaf,
            bin: BTreeMap::new(),
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn all_states(&self) -> StateSet {
        full_set(self.n_states())
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Automaton(format!("unknown state `{name}`")))
    }

    pub fn set_leaf(&mut self, q: usize, label: &str, accept: bool) {
        let e = self.leaf.entry(label.to_string()).or_insert(0);
        if accept {
            *e |= 1 << q;
        } else {
            *e &= !(1 << q);
        }
    }

    /// Declares a binary label with no transitions.
    pub fn declare_binary(&mut self, label: &str) {
        let n = self.n_states();
        self.bin
            .entry(label.to_string())
            .or_insert_with(|| vec![Vec::new(); n]);
    }

    pub fn add_bin(&mut self, q: usize, label: &str, left: usize, right: usize) {
        self.declare_binary(label);
        let v = &mut self.bin.get_mut(label).expect("declared")[q];
        if !v.contains(&(left, right)) {
            v.push((left, right));
            v.sort_unstable();
        }
    }

    /// `δ₀(q, label)`; `label` may be `Omega`.
    pub fn delta0(&self, q: usize, label: &str) -> Result<bool> {
        Ok(self.leaf_states(label)? & (1 << q) != 0)
    }

    /// States `q` with `δ₀(q, label)`.
    pub fn leaf_states(&self, label: &str) -> Result<StateSet> {
        self.leaf
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn delta2(&self, q: usize, label: &str) -> Result<&[(usize, usize)]> {
        self.bin
            .get(label)
            .map(|v| v[q].as_slice())
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn leaf_labels(&self) -> impl Iterator<Item = &str> {
        self.leaf.keys().map(String::as_str).filter(|l| *l != OMEGA)
    }

    pub fn binary_labels(&self) -> impl Iterator<Item = &str> {
        self.bin.keys().map(String::as_str)
    }

    /// `Q_Ω = { q | δ₀(q, Ω) }`.
    pub fn q_omega(&self) -> StateSet {
        self.leaf[OMEGA]
    }

    pub fn is_omega_blind(&self) -> bool {
        self.q_omega() == self.all_states()
    }

    /// States whose pairs for `label` meet `left × right`.
    pub fn pre_image(&self, label: &str, left: StateSet, right: StateSet) -> Result<StateSet> {
        let per_state = self
            .bin
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let mut out = 0;
        for (q, pairs) in per_state.iter().enumerate() {
            if pairs
                .iter()
                .any(|&(a, b)| left & (1 << a) != 0 && right & (1 << b) != 0)
            {
                out |= 1 << q;
            }
        }
        Ok(out)
    }

    /// Checks that every constant of a tree signature has transitions here.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        for (name, ty) in sig.iter() {
            if ty.is_base() {
                if !self.leaf.contains_key(name) {
                    return Err(Error::Automaton(format!(
                        "no leaf transitions for `{name}`"
                    )));
                }
            } else if *ty == SimpleType::binary() {
                if !self.bin.contains_key(name) {
                    return Err(Error::Automaton(format!(
                        "no binary transitions for `{name}`"
                    )));
                }
            } else {
                return Err(Error::NotTreeSignature(format!("{name} : {ty}")));
            }
        }
        Ok(())
    }

    /// Declares every constant of `sig` that has no transitions here with none:
    /// leaves accepted from no state, binary symbols with no pairs.
    pub fn complete_for(&mut self, sig: &Signature) {
        for name in sig.leaves() {
            self.leaf.entry(name.to_string()).or_insert(0);
        }
        for name in sig.binaries() {
            self.declare_binary(name);
        }
    }

    /// The states from which an accepting run exists on the finite tree `t`.
    pub fn accept_states(&self, t: &LabeledTree, policy: CutPolicy) -> Result<StateSet> {
        match (&t.label, t.children.as_slice()) {
            (Label::Cut, []) => Ok(match policy {
                CutPolicy::AcceptCuts => self.all_states(),
                CutPolicy::RejectCuts => 0,
            }),
            (Label::Omega, []) => Ok(self.q_omega()),
            (Label::Const(n) | Label::Annotated(n, _), []) => self.leaf_states(n),
            (Label::Const(n) | Label::Annotated(n, _), [l, r]) => {
                let ls = self.accept_states(l, policy)?;
                let rs = self.accept_states(r, policy)?;
                self.pre_image(n, ls, rs)
            }
            (l, cs) => Err(Error::UnknownLabel(format!(
                "{l} with {} children",
                cs.len()
            ))),
        }
    }

    /// Whether the finite tree is accepted from the initial state.
    pub fn accepts_finite(&self, t: &LabeledTree, policy: CutPolicy) -> Result<bool> {
        Ok(self.accept_states(t, policy)? & (1 << self.init) != 0)
    }

    /// The automaton with the same transitions started from `q`.
    pub fn with_init(&self, q: usize) -> TacAutomaton {
        TacAutomaton {
            init: q,
            ..self.clone()
        }
    }

    /// The library automata over a tree signature.
    pub fn example(which: ExampleAutomaton, sig: &Signature) -> Result<TacAutomaton> {
        if !sig.is_tree_signature() {
            return Err(Error::NotTreeSignature(
                "example automata need a tree signature".into(),
            ));
        }
        let leaves = sig.leaves();
        let bins = sig.binaries();
        match which {
            ExampleAutomaton::NoOmega => {
                let mut a = TacAutomaton::new(&["q"], "q")?;
                for c in &leaves {
                    a.set_leaf(0, c, true);
                }
                a.set_leaf(0, OMEGA, false);
                for b in &bins {
                    a.add_bin(0, b, 0, 0);
                }
                Ok(a)
            }
            ExampleAutomaton::HasHnf | ExampleAutomaton::ErrBeforeOmega => {
                if which == ExampleAutomaton::ErrBeforeOmega && !bins.contains(&"err") {
                    return Err(Error::Automaton(
                        "signature lacks the binary constant `err`".into(),
                    ));
                }
                let mut a = TacAutomaton::new(&["q", "q_top"], "q")?;
                for c in &leaves {
                    a.set_leaf(0, c, true);
                    a.set_leaf(1, c, true);
                }
                a.set_leaf(0, OMEGA, false);
                a.set_leaf(1, OMEGA, true);
                for b in &bins {
                    a.add_bin(1, b, 1, 1);
                    if which == ExampleAutomaton::HasHnf || *b == "err" {
                        a.add_bin(0, b, 1, 1);
                    } else {
                        a.add_bin(0, b, 0, 0);
                    }
                }
                Ok(a)
            }
        }
    }

    /// The same automaton made `Ω`-blind.
    pub fn omega_blind_variant(&self) -> TacAutomaton {
        let mut a = self.clone();
        a.leaf.insert(OMEGA.to_string(), self.all_states());
        a
    }

    /// Parses the line-oriented automaton format:
    ///
    /// ```text
    /// states q0 q1
    /// init q0
    /// leaf q0 c true
    /// leaf q0 Omega false
    /// bin q0 a -> (q0,q1) (q1,q1)
    /// ```
    ///
    /// Unless `total_default` is set, every state needs a `leaf` line for each
    /// leaf label used and a `bin` line for each binary label used.
    pub fn parse(text: &str, total_default: bool) -> Result<TacAutomaton> {
        let mut states: Option<Vec<String>> = None;
        let mut init: Option<String> = None;
        let mut leaf_lines: Vec<(usize, String, String, bool)> = Vec::new();
        let mut bin_lines: Vec<BinLine> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Syntax {
                line: line_no,
                col: 1,
                msg,
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words[0] {
                "states" => states = Some(words[1..].iter().map(|s| s.to_string()).collect()),
                "init" if words.len() == 2 => init = Some(words[1].to_string()),
                "leaf" if words.len() == 4 => {
                    let v = match words[3] {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(err(format!("expected true or false, found `{other}`")))
                        }
                    };
                    leaf_lines.push((line_no, words[1].to_string(), words[2].to_string(), v));
                }
                "bin" if words.len() >= 4 && words[3] == "->" => {
                    let rest: String = words[4..].concat();
                    let mut pairs = Vec::new();
                    for chunk in rest.split(')').filter(|s| !s.is_empty()) {
                        let inner = chunk
                            .strip_prefix('(')
                            .ok_or_else(|| err(format!("malformed pair near `{chunk}`")))?;
                        let (l, r) = inner
                            .split_once(',')
                            .ok_or_else(|| err(format!("malformed pair `({inner})`")))?;
                        pairs.push((l.trim().to_string(), r.trim().to_string()));
                    }
                    bin_lines.push((line_no, words[1].to_string(), words[2].to_string(), pairs));
                }
                other => return Err(err(format!("unrecognised line starting with `{other}`"))),
            }
        }
        let states = states.ok_or_else(|| Error::Automaton("missing `states` line".into()))?;
        let init = init.ok_or_else(|| Error::Automaton("missing `init` line".into()))?;
        let refs: Vec<&str> = states.iter().map(String::as_str).collect();
        let mut a = TacAutomaton::new(&refs, &init)?;
        let at = |line: usize, e: Error| match e {
            Error::Automaton(m) => Error::Syntax {
                line,
                col: 1,
                msg: m,
            },
            e => e,
        };
        let mut seen_leaf: BTreeMap<String, StateSet> = BTreeMap::new();
        let mut seen_bin: BTreeMap<String, StateSet> = BTreeMap::new();
        for (line, q, label, v) in leaf_lines {
            let qi = a.state_index(&q).map_err(|e| at(line, e))?;
            a.set_leaf(qi, &label, v);
            *seen_leaf.entry(label).or_insert(0) |= 1 << qi;
        }
        for (line, q, label, pairs) in bin_lines {
            let qi = a.state_index(&q).map_err(|e| at(line, e))?;
            a.declare_binary(&label);
            for (l, r) in pairs {
                let li = a.state_index(&l).map_err(|e| at(line, e))?;
                let ri = a.state_index(&r).map_err(|e| at(line, e))?;
                a.add_bin(qi, &label, li, ri);
            }
            *seen_bin.entry(label).or_insert(0) |= 1 << qi;
        }
        if !total_default {
            let all = a.all_states();
            seen_leaf.entry(OMEGA.to_string()).or_insert(0);
            for (label, seen) in seen_leaf.iter().chain(seen_bin.iter()) {
                if *seen != all {
                    let missing = (0..a.n_states())
                        .find(|q| seen & (1 << q) == 0)
                        .expect("some state missing");
                    return Err(Error::Automaton(format!(
                        "no transition given for state `{}` on `{label}` (use --total-default to default to none)",
                        a.states[missing]
                    )));
                }
            }
        }
        Ok(a)
    }

    /// Renders in the format accepted by [`TacAutomaton::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "states {}", self.states.join(" "));
        let _ = writeln!(s, "init {}", self.states[self.init]);
        for (label, set) in &self.leaf {
            for (q, name) in self.states.iter().enumerate() {
                let _ = writeln!(s, "leaf {name} {label} {}", set & (1 << q) != 0);
            }
        }
        for (label, per_state) in &self.bin {
            for (q, name) in self.states.iter().enumerate() {
                let pairs: Vec<String> = per_state[q]
                    .iter()
                    .map(|&(l, r)| format!("({},{})", self.states[l], self.states[r]))
                    .collect();
                let _ = writeln!(s, "bin {name} {label} -> {}", pairs.join(" "));
            }
        }
        s
    }

    /// Renders a state set as `{q, q_top}`.
    pub fn format_set(&self, set: StateSet) -> String {
        let names: Vec<&str> = (0..self.n_states())
            .filter(|q| set & (1 << q) != 0)
            .map(|q| self.states[q].as_str())
            .collect();
        format!("{{{}}}", names.join(", "))
    }
}

pub fn full_set(n: usize) -> StateSet {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Verdict of prefix-based acceptance, with the depth at which it was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixVerdict {
    Accepted(usize),
    Rejected(usize),
    Unknown(usize),
}

/// Runs `aut` on `BT(t)↓k` for `k ≤ max_depth` under both cut policies.
pub fn accepts_bt(aut: &TacAutomaton, t: &Term, max_depth: usize) -> Result<PrefixVerdict> {
    let full = bohm_truncate(t, max_depth)?;
    for k in 0..=max_depth {
        let prefix = full.truncate(k);
        if !aut.accepts_finite(&prefix, CutPolicy::AcceptCuts)? {
            return Ok(PrefixVerdict::Rejected(k));
        }
        if aut.accepts_finite(&prefix, CutPolicy::RejectCuts)? {
            return Ok(PrefixVerdict::Accepted(k));
        }
    }
    Ok(PrefixVerdict::Unknown(max_depth))
}
