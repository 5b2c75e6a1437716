use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{contains, free_direction, SetExpr, Space};
use crate::vectors::{int, scalar_serde, NormKind, Scalar, SparseVec};

/// Dyadic point system stored as a heap array: node `n` (1-based) sits at
/// index `n − 1` and has children `2n` and `2n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsTree {
    pub norm: NormKind,
    /// Number of levels; the tree has `2^depth − 1` nodes.
    pub depth: usize,
    #[serde(with = "scalar_serde")]
    pub epsilon: Scalar,
    /// Smallest sibling distance (gauge); `None` for a single node.
    #[serde(with = "scalar_serde::option")]
    pub sep: Option<Scalar>,
    pub nodes: Vec<SparseVec>,
    /// `u_n` for every internal node, so that children are `x_n ∓ u_n`.
    pub directions: Vec<SparseVec>,
}

impl EpsTree {
    pub fn node(&self, n: usize) -> &SparseVec {
        &self.nodes[n - 1]
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() / 2
    }
}

/// Grows a tree from `x_1` (zero when it is a member, else the first pool
/// point) by splitting every node along a free direction of norm at least ε.
pub fn build_eps_tree(space: &Space, set: &SetExpr, epsilon: &Scalar, depth: usize) -> Result<EpsTree> {
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if depth == 0 || depth > 24 {
        return Err(Error::invalid("depth must lie in 1..=24"));
    }
    let norm = space.norm;
    let floor = norm.gauge(epsilon);
    let root = {
        let zero = SparseVec::zero();
        if contains(set, &zero)? {
            zero
        } else {
            crate::indexes::default_pool(space, set)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::invalid("no root point available"))?
        }
    };
    let total = (1usize << depth) - 1;
    let mut nodes = Vec::with_capacity(total);
    nodes.push(root);
    let mut directions = Vec::with_capacity(total / 2);
    let mut sep: Option<Scalar> = None;
    for n in 1..=total / 2 {
        let x = nodes[n - 1].clone();
        let u = free_direction(space, set, std::slice::from_ref(&x), &Scalar::zero())?
            .filter(|u| u.norm(norm) >= floor)
            .ok_or(Error::TreeStalled { node: n })?;
        let gap = u.scale(&int(2)).norm(norm);
        sep = Some(sep.map_or(gap.clone(), |s| s.min(gap)));
        nodes.push(&x - &u);
        nodes.push(&x + &u);
        directions.push(u);
    }
    Ok(EpsTree {
        norm,
        depth,
        epsilon: epsilon.clone(),
        sep,
        nodes,
        directions,
    })
}

/// Re-checks the tree laws from the stored nodes alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCheck {
    pub midpoints: bool,
    pub separation: bool,
    pub members: bool,
}

impl TreeCheck {
    pub fn passed(&self) -> bool {
        self.midpoints && self.separation && self.members
    }
}

pub fn check_tree(set: &SetExpr, tree: &EpsTree) -> Result<TreeCheck> {
    let norm = tree.norm;
    let floor = norm.scale_gauge(&norm.gauge(&tree.epsilon), &int(2));
    let mut check = TreeCheck {
        midpoints: true,
        separation: true,
        members: true,
    };
    for n in 1..=tree.internal_count() {
        let (a, b) = (tree.node(2 * n), tree.node(2 * n + 1));
        if !(&(a + b) - &tree.node(n).scale(&int(2))).is_zero() {
            check.midpoints = false;
        }
        let gap = (a - b).norm(norm);
        if gap < floor || tree.sep.as_ref().is_some_and(|s| gap < *s) {
            check.separation = false;
        }
    }
    for x in &tree.nodes {
        if !contains(set, x)? {
            check.members = false;
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{ratio, Coord};

    fn e(i: Coord) -> SparseVec {
        SparseVec::unit(i)
    }

    #[test]
    fn ball_tree_uses_one_fresh_coordinate_per_level() {
        let ball = SetExpr::ball(int(1));
        let t = build_eps_tree(&Space::sup(), &ball, &int(1), 3).unwrap();
        assert_eq!(t.nodes.len(), 7);
        assert_eq!(t.node(1), &SparseVec::zero());
        assert_eq!(t.directions, vec![e(1), e(2), e(2)]);
        assert_eq!(t.node(4), &(&-&e(1) - &e(2)));
        assert_eq!(t.sep, Some(int(2)));
        assert!(check_tree(&ball, &t).unwrap().passed());
    }

    #[test]
    fn small_ball_stalls_at_the_root() {
        let err = build_eps_tree(&Space::sup(), &SetExpr::ball(ratio(1, 2)), &int(1), 2).unwrap_err();
        assert_eq!(err, Error::TreeStalled { node: 1 });
    }

    #[test]
    fn three_points_on_a_line() {
        let a = SetExpr::finite(vec![SparseVec::zero(), e(1), -&e(1)]);
        let t = build_eps_tree(&Space::sup(), &a, &int(1), 2).unwrap();
        assert_eq!(t.nodes, vec![SparseVec::zero(), -&e(1), e(1)]);
        assert_eq!(t.sep, Some(int(2)));
    }

    #[test]
    fn single_level_has_no_separation() {
        let t = build_eps_tree(&Space::sup(), &SetExpr::ball(ratio(1, 2)), &int(1), 1).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.sep, None);
    }
}
