//! Random mixed-paradigm instances for cross-checks and properties.
#![allow(dead_code)]

pub mod checks;
pub mod scale;

use mixalign::declare::instantiate;
use mixalign::{Constraint, MixedModel, NetBuilder, RationalCostScheme, Template, TransitionId};
use rand::seq::SliceRandom;
use rand::Rng;

pub const LABELS: [&str; 5] = ["a", "b", "c", "d", "e"];
pub const ALIEN: &str = "z";

pub const BINARY_TEMPLATES: [Template; 17] = [
    Template::RespondedExistence,
    Template::CoExistence,
    Template::Response,
    Template::Precedence,
    Template::AlternateResponse,
    Template::AlternatePrecedence,
    Template::ChainResponse,
    Template::ChainPrecedence,
    Template::NotCoExistence,
    Template::NotSuccession,
    Template::NotChainSuccession,
    Template::Choice,
    Template::ExclusiveChoice,
    Template::Succession,
    Template::AlternateSuccession,
    Template::Response,
    Template::Precedence,
];

pub struct Instance {
    pub mp: MixedModel,
    pub costs: RationalCostScheme,
    pub traces: Vec<Vec<String>>,
}

enum Tree {
    Leaf,
    Seq(Box<Tree>, Box<Tree>),
    Xor(Box<Tree>, Box<Tree>),
    /// Split and join transitions around two concurrent branches.
    And(Box<Tree>, Box<Tree>),
    /// Body, a redo transition back to its start and an exit transition.
    Loop(Box<Tree>),
}

impl Tree {
    fn transitions(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Seq(a, b) | Tree::Xor(a, b) => a.transitions() + b.transitions(),
            Tree::And(a, b) => 2 + a.transitions() + b.transitions(),
            Tree::Loop(a) => 2 + a.transitions(),
        }
    }
}

fn random_tree<R: Rng>(rng: &mut R, budget: usize) -> Tree {
    if budget <= 1 || rng.gen_bool(0.2) {
        return Tree::Leaf;
    }
    match rng.gen_range(0..10) {
        0..=3 => {
            let left = rng.gen_range(1..budget);
            Tree::Seq(Box::new(random_tree(rng, left)), Box::new(random_tree(rng, budget - left)))
        }
        4..=6 => {
            let left = rng.gen_range(1..budget);
            Tree::Xor(Box::new(random_tree(rng, left)), Box::new(random_tree(rng, budget - left)))
        }
        7..=8 if budget >= 4 => {
            let inner = budget - 2;
            let left = rng.gen_range(1..inner);
            Tree::And(Box::new(random_tree(rng, left)), Box::new(random_tree(rng, inner - left)))
        }
        _ if budget >= 3 => Tree::Loop(Box::new(random_tree(rng, budget - 2))),
        _ => Tree::Leaf,
    }
}

/// A net built from a random process tree, labelled randomly. Returns the
/// transition labels (None for silent) in id order.
fn random_net<R: Rng>(rng: &mut R) -> (NetBuilder, Vec<Option<String>>) {
    loop {
        let target = rng.gen_range(4..=8);
        let tree = random_tree(rng, target);
        let count = tree.transitions();
        if !(4..=8).contains(&count) {
            continue;
        }
        let has_free = rng.gen_bool(0.5);
        let silent = rng.gen_range(0..=2usize).min(count - 1);
        let mut labels: Vec<Option<String>> = (0..count)
            .map(|_| Some(LABELS[rng.gen_range(0..LABELS.len())].to_string()))
            .collect();
        let mut ids: Vec<usize> = (0..count).collect();
        ids.shuffle(rng);
        for &i in ids.iter().take(silent) {
            labels[i] = None;
        }
        if has_free {
            labels.push(Some(LABELS[rng.gen_range(0..LABELS.len())].to_string()));
        }
        let builder = build_tree_net(&tree, &labels, has_free);
        // A loop at the very start would give the source place an input.
        if builder.build().is_ok_and(|net| net.validate().is_ok()) {
            return (builder, labels);
        }
    }
}

fn build_tree_net(tree: &Tree, labels: &[Option<String>], has_free: bool) -> NetBuilder {
    let mut shape = ShapeEmitter::default();
    let source = shape.place();
    let sink = shape.place();
    shape.emit(tree, source, sink);
    let mut b = NetBuilder::new();
    for p in 0..shape.places {
        b.place(&format!("p{p}"));
    }
    for (idx, (inputs, outputs)) in shape.transitions.iter().enumerate() {
        let name = format!("t{idx}");
        b.transition(&name, labels[idx].as_deref());
        for p in inputs {
            b.arc(&format!("p{p}"), &name);
        }
        for p in outputs {
            b.arc(&name, &format!("p{p}"));
        }
    }
    if has_free {
        let name = format!("t{}", shape.transitions.len());
        b.transition(&name, labels[shape.transitions.len()].as_deref());
    }
    b.initial(&format!("p{source}"), 1).final_marking(&format!("p{sink}"), 1);
    b
}

#[derive(Default)]
struct ShapeEmitter {
    places: usize,
    transitions: Vec<(Vec<usize>, Vec<usize>)>,
}

impl ShapeEmitter {
    fn place(&mut self) -> usize {
        self.places += 1;
        self.places - 1
    }

    fn emit(&mut self, tree: &Tree, from: usize, to: usize) {
        match tree {
            Tree::Leaf => self.transitions.push((vec![from], vec![to])),
            Tree::Seq(a, b) => {
                let mid = self.place();
                self.emit(a, from, mid);
                self.emit(b, mid, to);
            }
            Tree::Xor(a, b) => {
                self.emit(a, from, to);
                self.emit(b, from, to);
            }
            Tree::And(a, b) => {
                let (a_in, a_out, b_in, b_out) = (self.place(), self.place(), self.place(), self.place());
                self.transitions.push((vec![from], vec![a_in, b_in]));
                self.emit(a, a_in, a_out);
                self.emit(b, b_in, b_out);
                self.transitions.push((vec![a_out, b_out], vec![to]));
            }
            Tree::Loop(body) => {
                let mid = self.place();
                self.emit(body, from, mid);
                self.transitions.push((vec![mid], vec![from]));
                self.transitions.push((vec![mid], vec![to]));
            }
        }
    }
}

pub fn random_constraints<R: Rng>(rng: &mut R, transitions: usize, count: usize) -> Vec<Constraint> {
    (0..count)
        .map(|k| {
            let template = BINARY_TEMPLATES[rng.gen_range(0..BINARY_TEMPLATES.len())];
            let a = rng.gen_range(0..transitions);
            let mut b = rng.gen_range(0..transitions - 1);
            if b >= a {
                b += 1;
            }
            Constraint::new(format!("k{}", k + 1), template, vec![TransitionId(a), TransitionId(b)], None)
        })
        .collect()
}

/// Random walk over the net (constraints ignored) of at most `max_len` firings.
pub fn random_run<R: Rng>(rng: &mut R, mp: &MixedModel, max_len: usize) -> Vec<TransitionId> {
    let mut marking = mp.net.initial_marking().clone();
    let mut run = Vec::new();
    while run.len() < max_len && &marking != mp.net.final_marking() {
        let enabled = mp.net.enabled_transitions(&marking);
        let Some(&t) = enabled.choose(rng) else { break };
        marking = mp.net.fire(&marking, t).unwrap();
        run.push(t);
    }
    run
}

pub fn random_trace<R: Rng>(rng: &mut R, mp: &MixedModel) -> Vec<String> {
    let alphabet: Vec<&str> = LABELS.iter().copied().chain([ALIEN]).collect();
    let len = rng.gen_range(0..=8);
    if rng.gen_bool(0.5) {
        // Noisy observable run.
        let run = random_run(rng, mp, 12);
        let mut trace: Vec<String> = mp.net.observable(&run);
        trace.retain(|_| rng.gen_bool(0.85));
        if rng.gen_bool(0.5) && trace.len() < 8 {
            let pos = rng.gen_range(0..=trace.len());
            trace.insert(pos, alphabet[rng.gen_range(0..alphabet.len())].to_string());
        }
        trace.truncate(8);
        trace
    } else {
        (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())].to_string()).collect()
    }
}

/// Instance with a 4–8 transition net (0–2 silent, 0–1 free), 1–6 binary
/// constraints and `traces` random traces of length 0–8.
pub fn random_instance<R: Rng>(rng: &mut R, traces: usize) -> Instance {
    let (builder, labels) = random_net(rng);
    let net = builder.build().expect("generated nets are well formed");
    let count = rng.gen_range(1..=6);
    let constraints = random_constraints(rng, labels.len(), count)
        .into_iter()
        .map(|c| instantiate(c, labels.len()).expect("generated constraints are valid"))
        .collect();
    let mp = MixedModel::new(net, constraints);
    let costs = checks::random_costs(rng);
    let traces = (0..traces).map(|_| random_trace(rng, &mp)).collect();
    Instance { mp, costs, traces }
}

pub fn corpus(seed: u64, instances: usize, traces: usize) -> Vec<Instance> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..instances).map(|_| random_instance(&mut rng, traces)).collect()
}
