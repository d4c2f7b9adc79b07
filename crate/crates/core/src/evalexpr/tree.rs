use crate::error::{Error, Result};
use crate::expr::{Expr, Op};

/// Node payload of an [`ExprTree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(String),
    Op(Op),
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub children: Option<(usize, usize)>,
}

/// An expression flattened into an arena. Nodes are numbered in pre-order,
/// so the root is node 0 and every parent precedes its children.
#[derive(Clone, Debug)]
pub struct ExprTree {
    nodes: Vec<TreeNode>,
}

impl ExprTree {
    pub fn new(expr: &Expr) -> ExprTree {
        let mut nodes = Vec::new();
        fn add(e: &Expr, parent: Option<usize>, nodes: &mut Vec<TreeNode>) -> usize {
            let id = nodes.len();
            match e {
                Expr::Leaf(n) => nodes.push(TreeNode {
                    kind: NodeKind::Leaf(n.clone()),
                    parent,
                    children: None,
                }),
                Expr::Node(op, a, b) => {
                    nodes.push(TreeNode {
                        kind: NodeKind::Op(*op),
                        parent,
                        children: None,
                    });
                    let l = add(a, Some(id), nodes);
                    let r = add(b, Some(id), nodes);
                    nodes[id].children = Some((l, r));
                }
            }
            id
        }
        add(expr, None, &mut nodes);
        ExprTree { nodes }
    }

    pub const ROOT: usize = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn leaf_name(&self, i: usize) -> Option<&str> {
        match &self.nodes[i].kind {
            NodeKind::Leaf(n) => Some(n),
            NodeKind::Op(_) => None,
        }
    }

    pub fn op(&self, i: usize) -> Option<Op> {
        match self.nodes[i].kind {
            NodeKind::Op(op) => Some(op),
            NodeKind::Leaf(_) => None,
        }
    }

    pub fn is_intersection(&self, i: usize) -> bool {
        self.op(i) == Some(Op::Intersect)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.nodes[i].children.is_none())
    }

    /// The subexpression rooted at `i`.
    pub fn subexpr(&self, i: usize) -> Expr {
        match (&self.nodes[i].kind, self.nodes[i].children) {
            (NodeKind::Leaf(n), _) => Expr::leaf(n.clone()),
            (NodeKind::Op(op), Some((a, b))) => Expr::op(*op, self.subexpr(a), self.subexpr(b)),
            (NodeKind::Op(_), None) => unreachable!("operator without children"),
        }
    }
}

/// Per-node size bounds and the structure the evaluator derives from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    /// Largest possible size of the subresult at each node.
    pub psi: Vec<u64>,
    /// Smallest `psi` on the path from the node to the root.
    pub psi_star: Vec<u64>,
    /// Already-evaluated subtree of size `psi_star` used to shrink this
    /// node's result, when `psi_star < psi`.
    pub reduce_partner: Vec<Option<usize>>,
    /// Nearest strict ancestor that is an intersection (`None`: the root
    /// region).
    pub nia: Vec<Option<usize>>,
    /// Which child subtree of `nia` the node lies in (0 left, 1 right).
    pub side: Vec<u8>,
}

/// Computes `psi`, `psi*`, reduction partners and intersection ancestors.
/// `size_of` gives the size of each leaf set.
pub fn annotate(tree: &ExprTree, size_of: impl Fn(&str) -> Option<u64>) -> Result<Annotation> {
    let n = tree.len();
    let mut psi = vec![0u64; n];
    for i in (0..n).rev() {
        psi[i] = match (&tree.node(i).kind, tree.node(i).children) {
            (NodeKind::Leaf(name), _) => size_of(name).ok_or_else(|| Error::UnknownSet(name.clone()))?,
            (NodeKind::Op(Op::Union), Some((a, b))) => psi[a].saturating_add(psi[b]),
            (NodeKind::Op(Op::Intersect), Some((a, b))) => psi[a].min(psi[b]),
            (NodeKind::Op(_), None) => unreachable!("operator without children"),
        };
    }
    let mut psi_star = vec![0u64; n];
    let mut nia = vec![None; n];
    let mut side = vec![0u8; n];
    for i in 0..n {
        match tree.node(i).parent {
            None => psi_star[i] = psi[i],
            Some(p) => {
                psi_star[i] = psi[i].min(psi_star[p]);
                let is_right = tree.node(p).children.expect("parent").1 == i;
                if tree.is_intersection(p) {
                    nia[i] = Some(p);
                    side[i] = u8::from(is_right);
                } else {
                    nia[i] = nia[p];
                    side[i] = side[p];
                }
            }
        }
    }
    let mut reduce_partner = vec![None; n];
    for v in 0..n {
        if psi_star[v] == psi[v] {
            continue;
        }
        let (mut child, mut u) = (v, tree.node(v).parent);
        while let Some(a) = u {
            if psi[a] == psi_star[v] {
                let (l, r) = tree.node(a).children.expect("ancestor has children");
                reduce_partner[v] = Some(if l == child { r } else { l });
                break;
            }
            child = a;
            u = tree.node(a).parent;
        }
    }
    Ok(Annotation {
        psi,
        psi_star,
        reduce_partner,
        nia,
        side,
    })
}

impl Annotation {
    /// Children of `v` in evaluation order: smaller `psi*` first, then
    /// smaller `psi`, then left first.
    ///
    /// Both children of an intersection always share `psi*`, so the `psi`
    /// tiebreak is what puts a reduction partner before the subtree that
    /// needs it.
    pub fn visit_order(&self, tree: &ExprTree, v: usize) -> Option<(usize, usize)> {
        let (l, r) = tree.node(v).children?;
        let key = |i: usize| (self.psi_star[i], self.psi[i]);
        Some(if key(r) < key(l) { (r, l) } else { (l, r) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn sizes(pairs: &[(&str, u64)]) -> impl Fn(&str) -> Option<u64> {
        let m: HashMap<String, u64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        move |n| m.get(n).copied()
    }

    #[test]
    fn union_of_intersection() {
        let t = ExprTree::new(&"((A & B) | C)".parse().unwrap());
        // ids: 0 root, 1 (A&B), 2 A, 3 B, 4 C
        let a = annotate(&t, sizes(&[("A", 10), ("B", 4), ("C", 7)])).unwrap();
        assert_eq!(a.psi, vec![11, 4, 10, 4, 7]);
        assert_eq!(a.psi_star, vec![11, 4, 4, 4, 7]);
        assert_eq!(a.reduce_partner, vec![None, None, Some(3), None, None]);
        assert_eq!(a.nia, vec![None, None, Some(1), Some(1), None]);
        assert_eq!(a.side, vec![0, 0, 0, 1, 0]);
        assert_eq!(a.visit_order(&t, 1), Some((3, 2)));
    }

    #[test]
    fn intersection_over_union() {
        let t = ExprTree::new(&"(A & (B | C))".parse().unwrap());
        let a = annotate(&t, sizes(&[("A", 3), ("B", 50), ("C", 60)])).unwrap();
        assert_eq!(a.psi_star[3], 3);
        assert_eq!(a.psi_star[4], 3);
        assert_eq!(a.reduce_partner[3], Some(1));
        assert_eq!(a.reduce_partner[4], Some(1));
        assert_eq!(a.reduce_partner[2], Some(1));
        assert_eq!(a.visit_order(&t, 0), Some((1, 2)));
    }

    #[test]
    fn single_leaf() {
        let t = ExprTree::new(&Expr::leaf("A"));
        let a = annotate(&t, sizes(&[("A", 5)])).unwrap();
        assert_eq!((a.psi[0], a.psi_star[0], a.reduce_partner[0]), (5, 5, None));
        assert!(annotate(&t, sizes(&[])).is_err());
    }
}
