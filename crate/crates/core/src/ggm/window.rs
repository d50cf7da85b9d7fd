use serde::Serialize;

use crate::error::{Error, Result};

/// Entries allowed in an enumerated measure table unless `SOS_GGM_BUDGET` says otherwise.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

pub fn budget_from_env() -> u64 {
    std::env::var("SOS_GGM_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Ball of radius R around the root of the Cayley tree with k + 1 neighbours per vertex.
///
/// Vertices are numbered breadth-first with the root at 0. Edge `e` points from
/// `parent[e + 1]` to vertex `e + 1`, so the edges of a smaller ball are a prefix of
/// the edges of a larger one. The inner region is the ball of radius R − 1; the outer
/// boundary is the sphere of radius R.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeWindow {
    pub k: u32,
    pub radius: u32,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<u32>,
    pub boundary: Vec<usize>,
    /// Edge indices on the path from the root to each boundary vertex, in order.
    pub paths: Vec<Vec<usize>>,
}

impl TreeWindow {
    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.parent[e + 1].expect("non-root vertex"), e + 1)
    }

    pub fn is_inner(&self, v: usize) -> bool {
        self.depth[v] < self.radius
    }

    pub fn degree(&self, v: usize) -> usize {
        let children = self.parent.iter().filter(|p| **p == Some(v)).count();
        children + usize::from(self.parent[v].is_some())
    }

    /// Size (2M + 1)^edges of the truncated configuration space.
    pub fn configurations(&self, m: u32) -> f64 {
        (2.0 * m as f64 + 1.0).powi(self.edge_count() as i32)
    }

    pub fn check_budget(&self, m: u32, budget: u64) -> Result<()> {
        let needed = self.configurations(m);
        if needed > budget as f64 {
            Err(Error::BudgetExceeded { needed, budget })
        } else {
            Ok(())
        }
    }
}

pub fn build_window(k: u32, radius: u32) -> Result<TreeWindow> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if radius < 1 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    let expected =
        1.0 + (k as f64 + 1.0) * ((k as f64).powi(radius as i32) - 1.0) / (k as f64 - 1.0);
    if expected > 1e7 {
        return Err(Error::BudgetExceeded {
            needed: expected,
            budget: 10_000_000,
        });
    }
    let mut parent = vec![None];
    let mut depth = vec![0u32];
    let mut frontier = vec![0usize];
    for d in 1..=radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let children = if v == 0 { k + 1 } else { k };
            for _ in 0..children {
                parent.push(Some(v));
                depth.push(d);
                next.push(parent.len() - 1);
            }
        }
        frontier = next;
    }
    let paths = frontier
        .iter()
        .map(|&y| {
            let mut path = Vec::new();
            let mut v = y;
            while let Some(p) = parent[v] {
                path.push(v - 1);
                v = p;
            }
            path.reverse();
            path
        })
        .collect();
    Ok(TreeWindow {
        k,
        radius,
        parent,
        depth,
        boundary: frontier,
        paths,
    })
}
