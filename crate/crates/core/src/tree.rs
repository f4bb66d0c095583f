//! Computation trees: complete paths, path areas, determinism and solving
//! checks, and the canonical tree read off a problem description.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{
    all_tuples, run_registers, Expression, Problem, StructureInstance,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Root,
    Functional { expr: Expression },
    Predicate { expr: Expression },
    Terminal { label: u64 },
}

/// An edge to a child node. `label` is None on edges leaving the root or a
/// functional node and Some(0|1) on edges leaving a predicate node;
/// "unlabeled" is represented explicitly, never as label 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: Option<u8>,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub children: Vec<Edge>,
}

/// A computation tree. Node 0 is the root; every other node is reachable
/// from it by exactly one edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputationTree {
    pub input_vars: BTreeSet<usize>,
    pub nodes: Vec<TreeNode>,
}

/// A root-to-terminal path: the expression sequence it carries, the edge
/// labels read at its predicate nodes, and its terminal answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletePath {
    pub nodes: Vec<usize>,
    pub seq: Vec<Expression>,
    pub labels: Vec<u8>,
    pub answer: u64,
}

impl ComputationTree {
    pub fn new(input_vars: BTreeSet<usize>, nodes: Vec<TreeNode>) -> Result<Self> {
        let t = ComputationTree { input_vars, nodes };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_vars.is_empty() {
            return Err(Error::MalformedTree("Y must be nonempty".into()));
        }
        if self.nodes.len() < 2 {
            return Err(Error::MalformedTree("a tree has at least two nodes".into()));
        }
        if !matches!(self.nodes[0].kind, NodeKind::Root) {
            return Err(Error::MalformedTree("node 0 must be the root".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        for (id, node) in self.nodes.iter().enumerate() {
            match &node.kind {
                NodeKind::Root => {
                    if id != 0 {
                        return Err(Error::MalformedTree("root must be node 0".into()));
                    }
                    if node.children.is_empty() {
                        return Err(Error::MalformedTree("root has no leaving edge".into()));
                    }
                }
                NodeKind::Terminal { .. } => {
                    if !node.children.is_empty() {
                        return Err(Error::MalformedTree(format!(
                            "terminal {id} has leaving edges"
                        )));
                    }
                }
                NodeKind::Functional { .. } | NodeKind::Predicate { .. } => {
                    if node.children.is_empty() {
                        return Err(Error::MalformedTree(format!(
                            "working node {id} has no leaving edge"
                        )));
                    }
                }
            }
            let labeled = matches!(node.kind, NodeKind::Predicate { .. });
            for e in &node.children {
                match (labeled, e.label) {
                    (true, Some(0)) | (true, Some(1)) | (false, None) => {}
                    (true, _) => {
                        return Err(Error::MalformedTree(format!(
                            "edge leaving predicate node {id} must be labeled 0 or 1"
                        )));
                    }
                    (false, Some(_)) => {
                        return Err(Error::MalformedTree(format!(
                            "edge leaving node {id} must be unlabeled"
                        )));
                    }
                }
                if e.to >= self.nodes.len() {
                    return Err(Error::MalformedTree(format!(
                        "edge from {id} points to missing node {}",
                        e.to
                    )));
                }
                if e.to == 0 {
                    return Err(Error::MalformedTree("root has an entering edge".into()));
                }
                if std::mem::replace(&mut seen[e.to], true) {
                    return Err(Error::MalformedTree(format!(
                        "node {} has two entering edges",
                        e.to
                    )));
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(Error::MalformedTree(format!(
                "node {orphan} is unreachable"
            )));
        }
        Ok(())
    }

    /// All complete paths, one per terminal, in preorder.
    pub fn complete_paths(&self) -> Result<Vec<CompletePath>> {
        self.validate()?;
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new(), Vec::new(), Vec::new())];
        while let Some((id, nodes, seq, labels)) = stack.pop() {
            let mut nodes: Vec<usize> = nodes;
            nodes.push(id);
            let node = &self.nodes[id];
            match &node.kind {
                NodeKind::Terminal { label } => {
                    out.push(CompletePath {
                        nodes,
                        seq,
                        labels,
                        answer: *label,
                    });
                }
                _ => {
                    // Push children in reverse so the stack pops them in order.
                    for e in node.children.iter().rev() {
                        let mut seq = seq.clone();
                        let mut labels = labels.clone();
                        match &node.kind {
                            NodeKind::Functional { expr } => seq.push(expr.clone()),
                            NodeKind::Predicate { expr } => {
                                seq.push(expr.clone());
                                labels.push(e.label.expect("validated"));
                            }
                            _ => {}
                        }
                        stack.push((e.to, nodes.clone(), seq, labels));
                    }
                }
            }
        }
        Ok(out)
    }

    /// True iff the root and every functional node have out-degree 1 and the
    /// edges leaving each predicate node carry pairwise different labels.
    pub fn is_deterministic(&self) -> bool {
        self.nodes.iter().all(|node| match node.kind {
            NodeKind::Root | NodeKind::Functional { .. } => node.children.len() == 1,
            NodeKind::Predicate { .. } => {
                let labels: BTreeSet<Option<u8>> =
                    node.children.iter().map(|e| e.label).collect();
                labels.len() == node.children.len()
            }
            NodeKind::Terminal { .. } => true,
        })
    }
}

/// The area A(ξ): all input tuples satisfying the path's equation system.
/// A path with no predicate expressions has area carrier^n.
pub fn path_area(
    u: &StructureInstance,
    tree: &ComputationTree,
    path: &CompletePath,
) -> Result<BTreeSet<Vec<usize>>> {
    let n = tree.input_vars.len();
    let mut area = BTreeSet::new();
    for tuple in all_tuples(u.card(), n) {
        if tuple_in_path(u, &tree.input_vars, path, &tuple)? {
            area.insert(tuple);
        }
    }
    Ok(area)
}

fn tuple_in_path(
    u: &StructureInstance,
    input_vars: &BTreeSet<usize>,
    path: &CompletePath,
    tuple: &[usize],
) -> Result<bool> {
    if path.labels.is_empty() {
        // No equations; check the sequence still evaluates (symbols valid).
        run_registers(u, input_vars, &path.seq, tuple)?;
        return Ok(true);
    }
    let run = run_registers(u, input_vars, &path.seq, tuple)?;
    Ok(run.predicate_values == path.labels)
}

/// Why a tree fails to solve a problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveFailure {
    InputVarsDiffer,
    NotDeterministic,
    /// Some input tuple lies in no path area.
    CoverageGap { tuple: Vec<usize> },
    /// A path covering `tuple` answers `answer`, which is not in z(tuple).
    WrongAnswer {
        tuple: Vec<usize>,
        path: usize,
        answer: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub solves: bool,
    pub failure: Option<SolveFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Deterministic,
    Nondeterministic,
}

/// Check whether a tree solves a problem: the trees' and problem's input
/// variables agree, the path areas cover carrier^n, and every covering
/// path's answer is acceptable. Deterministic mode additionally requires the
/// determinism conditions.
pub fn solves(
    u: &StructureInstance,
    tree: &ComputationTree,
    z: &Problem,
    mode: SolveMode,
) -> Result<SolveReport> {
    z.validate(u)?;
    let fail = |f: SolveFailure| SolveReport {
        solves: false,
        failure: Some(f),
    };
    if tree.input_vars != z.input_vars {
        return Ok(fail(SolveFailure::InputVarsDiffer));
    }
    if mode == SolveMode::Deterministic && !tree.is_deterministic() {
        return Ok(fail(SolveFailure::NotDeterministic));
    }
    let paths = tree.complete_paths()?;
    let n = z.n();
    for tuple in all_tuples(u.card(), n) {
        let mut covered = false;
        for (pi, path) in paths.iter().enumerate() {
            if !tuple_in_path(u, &tree.input_vars, path, &tuple)? {
                continue;
            }
            covered = true;
            let acceptable = crate::structure::problem_value(u, z, &tuple)?;
            if !acceptable.contains(&path.answer) {
                return Ok(fail(SolveFailure::WrongAnswer {
                    tuple,
                    path: pi,
                    answer: path.answer,
                }));
            }
        }
        if !covered {
            return Ok(fail(SolveFailure::CoverageGap { tuple }));
        }
    }
    Ok(SolveReport {
        solves: true,
        failure: None,
    })
}

/// The deterministic tree whose every complete path carries exactly the
/// problem's expression sequence: functional steps chain, predicate steps
/// branch on 0/1, and the terminal for signature d is labeled min nu(d).
pub fn canonical_tree(z: &Problem) -> Result<ComputationTree> {
    z.validate_shape()?;
    let mut nodes = vec![TreeNode {
        kind: NodeKind::Root,
        children: Vec::new(),
    }];
    build_canonical(&mut nodes, 0, None, &z.seq, &mut Vec::new(), &z.nu);
    ComputationTree::new(z.input_vars.clone(), nodes)
}

fn build_canonical(
    nodes: &mut Vec<TreeNode>,
    parent: usize,
    label: Option<u8>,
    rest: &[Expression],
    signature: &mut Vec<u8>,
    nu: &crate::structure::Nu,
) {
    let id = nodes.len();
    match rest.first() {
        None => {
            let answer = *nu.lookup(signature).iter().next().expect("nu nonempty");
            nodes.push(TreeNode {
                kind: NodeKind::Terminal { label: answer },
                children: Vec::new(),
            });
            nodes[parent].children.push(Edge { label, to: id });
        }
        Some(e @ Expression::Functional { .. }) => {
            nodes.push(TreeNode {
                kind: NodeKind::Functional { expr: e.clone() },
                children: Vec::new(),
            });
            nodes[parent].children.push(Edge { label, to: id });
            build_canonical(nodes, id, None, &rest[1..], signature, nu);
        }
        Some(e @ Expression::Predicate { .. }) => {
            nodes.push(TreeNode {
                kind: NodeKind::Predicate { expr: e.clone() },
                children: Vec::new(),
            });
            nodes[parent].children.push(Edge { label, to: id });
            for delta in 0..=1u8 {
                signature.push(delta);
                build_canonical(nodes, id, Some(delta), &rest[1..], signature, nu);
                signature.pop();
            }
        }
    }
}

/// Render a tree as indented text, one node per line.
pub fn render_text(tree: &ComputationTree) -> String {
    let mut out = String::new();
    render_node(tree, 0, 0, None, &mut out);
    out
}

fn render_node(
    tree: &ComputationTree,
    id: usize,
    depth: usize,
    label: Option<u8>,
    out: &mut String,
) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    if let Some(l) = label {
        out.push_str(&format!("[{l}] "));
    }
    match &tree.nodes[id].kind {
        NodeKind::Root => out.push_str("root"),
        NodeKind::Functional { expr } => out.push_str(&format!("{expr}")),
        NodeKind::Predicate { expr } => out.push_str(&format!("{expr}?")),
        NodeKind::Terminal { label } => out.push_str(&format!("-> {label}")),
    }
    out.push('\n');
    for e in &tree.nodes[id].children {
        render_node(tree, e.to, depth + 1, e.label, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Nu;
    use crate::zoo::fixtures;

    fn one_terminal(answer: u64) -> ComputationTree {
        ComputationTree::new(
            [1].into_iter().collect(),
            vec![
                TreeNode {
                    kind: NodeKind::Root,
                    children: vec![Edge { label: None, to: 1 }],
                },
                TreeNode {
                    kind: NodeKind::Terminal { label: answer },
                    children: Vec::new(),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn one_terminal_tree_has_one_empty_path() {
        let t = one_terminal(0);
        let paths = t.complete_paths().unwrap();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].seq.is_empty());
        assert_eq!(paths[0].answer, 0);
    }

    #[test]
    fn full_binary_tree_has_four_paths() {
        let z1 = fixtures::z1();
        let t = canonical_tree(&z1).unwrap();
        assert_eq!(t.complete_paths().unwrap().len(), 4);
    }

    #[test]
    fn empty_sequence_path_has_full_area() {
        let s1 = fixtures::s1();
        let t = one_terminal(0);
        let paths = t.complete_paths().unwrap();
        let area = path_area(&s1, &t, &paths[0]).unwrap();
        assert_eq!(area.len(), 4);
    }

    #[test]
    fn single_test_path_area_matches_predicate_table() {
        // Path testing l_1 = 0 over S1 has area {0, 1}.
        let s1 = fixtures::s1();
        let t = ComputationTree::new(
            [1].into_iter().collect(),
            vec![
                TreeNode {
                    kind: NodeKind::Root,
                    children: vec![Edge { label: None, to: 1 }],
                },
                TreeNode {
                    kind: NodeKind::Predicate {
                        expr: Expression::predicate("l_1", &[1]),
                    },
                    children: vec![Edge {
                        label: Some(0),
                        to: 2,
                    }],
                },
                TreeNode {
                    kind: NodeKind::Terminal { label: 0 },
                    children: Vec::new(),
                },
            ],
        )
        .unwrap();
        let paths = t.complete_paths().unwrap();
        let area = path_area(&s1, &t, &paths[0]).unwrap();
        assert_eq!(
            area,
            [vec![0], vec![1]].into_iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn contradictory_path_has_empty_area() {
        let s1 = fixtures::s1();
        let t = ComputationTree::new(
            [1].into_iter().collect(),
            vec![
                TreeNode {
                    kind: NodeKind::Root,
                    children: vec![Edge { label: None, to: 1 }],
                },
                TreeNode {
                    kind: NodeKind::Predicate {
                        expr: Expression::predicate("l_0", &[1]),
                    },
                    children: vec![Edge {
                        label: Some(1),
                        to: 2,
                    }],
                },
                TreeNode {
                    kind: NodeKind::Predicate {
                        expr: Expression::predicate("l_0", &[1]),
                    },
                    children: vec![Edge {
                        label: Some(0),
                        to: 3,
                    }],
                },
                TreeNode {
                    kind: NodeKind::Terminal { label: 0 },
                    children: Vec::new(),
                },
            ],
        )
        .unwrap();
        let paths = t.complete_paths().unwrap();
        let area = path_area(&s1, &t, &paths[0]).unwrap();
        assert!(area.is_empty());
    }

    #[test]
    fn determinism_conditions() {
        let z1 = fixtures::z1();
        let chain = canonical_tree(&z1).unwrap();
        assert!(chain.is_deterministic());

        // Predicate node with two 0-labeled children.
        let mut dup = chain.clone();
        for node in &mut dup.nodes {
            if matches!(node.kind, NodeKind::Predicate { .. }) && node.children.len() == 2 {
                node.children[1].label = Some(0);
                break;
            }
        }
        assert!(!dup.is_deterministic());

        // Root with two children.
        let mut wide = chain.clone();
        let to = wide.nodes[0].children[0].to;
        let extra = wide.nodes.len();
        wide.nodes.push(TreeNode {
            kind: NodeKind::Terminal { label: 0 },
            children: Vec::new(),
        });
        let _ = to;
        wide.nodes[0].children.push(Edge {
            label: None,
            to: extra,
        });
        assert!(!wide.is_deterministic());
    }

    #[test]
    fn trivial_tree_solves_constant_problem() {
        let s1 = fixtures::s1();
        let z = Problem::new(
            [1].into_iter().collect(),
            Nu::constant(1, [0].into_iter().collect()),
            vec![Expression::predicate("l_0", &[1])],
        )
        .unwrap();
        let t = one_terminal(0);
        let r = solves(&s1, &t, &z, SolveMode::Nondeterministic).unwrap();
        assert!(r.solves, "{:?}", r.failure);
    }

    #[test]
    fn partial_coverage_is_reported() {
        // A tree covering only the l_0 = 0 side misses tuple (1).
        let s1 = fixtures::s1();
        let z1 = fixtures::z1();
        let t = ComputationTree::new(
            [1].into_iter().collect(),
            vec![
                TreeNode {
                    kind: NodeKind::Root,
                    children: vec![Edge { label: None, to: 1 }],
                },
                TreeNode {
                    kind: NodeKind::Predicate {
                        expr: Expression::predicate("l_0", &[1]),
                    },
                    children: vec![Edge {
                        label: Some(0),
                        to: 2,
                    }],
                },
                TreeNode {
                    kind: NodeKind::Terminal { label: 10 },
                    children: Vec::new(),
                },
            ],
        )
        .unwrap();
        let r = solves(&s1, &t, &z1, SolveMode::Nondeterministic).unwrap();
        assert!(!r.solves);
        assert_eq!(
            r.failure,
            Some(SolveFailure::CoverageGap { tuple: vec![1] })
        );
    }

    #[test]
    fn canonical_tree_of_z1() {
        let s1 = fixtures::s1();
        let z1 = fixtures::z1();
        let t = canonical_tree(&z1).unwrap();
        assert!(t.is_deterministic());
        let r = solves(&s1, &t, &z1, SolveMode::Deterministic).unwrap();
        assert!(r.solves, "{:?}", r.failure);
        // Terminal labels by signature (delta_1, delta_2): the nu table of Z1.
        let paths = t.complete_paths().unwrap();
        assert_eq!(paths.len(), 4);
        for p in &paths {
            let expected = match p.labels.as_slice() {
                [0, 0] => 10,
                [0, 1] => 13,
                [1, 0] => 11,
                [1, 1] => 12,
                _ => unreachable!(),
            };
            assert_eq!(p.answer, expected);
        }
    }

    #[test]
    fn canonical_tree_constant_nu() {
        let z = Problem::new(
            [1].into_iter().collect(),
            Nu::constant(1, [7].into_iter().collect()),
            vec![Expression::predicate("l_0", &[1])],
        )
        .unwrap();
        let t = canonical_tree(&z).unwrap();
        let terminals: Vec<u64> = t
            .complete_paths()
            .unwrap()
            .iter()
            .map(|p| p.answer)
            .collect();
        assert_eq!(terminals, vec![7, 7]);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let t = ComputationTree {
            input_vars: [1].into_iter().collect(),
            nodes: vec![TreeNode {
                kind: NodeKind::Root,
                children: Vec::new(),
            }],
        };
        assert!(matches!(t.validate(), Err(Error::MalformedTree(_))));

        // Unlabeled edge out of a predicate node.
        let t = ComputationTree {
            input_vars: [1].into_iter().collect(),
            nodes: vec![
                TreeNode {
                    kind: NodeKind::Root,
                    children: vec![Edge { label: None, to: 1 }],
                },
                TreeNode {
                    kind: NodeKind::Predicate {
                        expr: Expression::predicate("l_0", &[1]),
                    },
                    children: vec![Edge { label: None, to: 2 }],
                },
                TreeNode {
                    kind: NodeKind::Terminal { label: 0 },
                    children: Vec::new(),
                },
            ],
        };
        assert!(matches!(t.validate(), Err(Error::MalformedTree(_))));
    }

    #[test]
    fn tree_round_trips_through_json() {
        let t = canonical_tree(&fixtures::z1()).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: ComputationTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
