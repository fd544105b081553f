//! Restriction of the Laplacian to a finite vertex set with Dirichlet
//! boundary conditions.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::metric::BallReport;

/// `L_R` on a finite set `B`: `(L_R v)(x) = (deg(x) v(x) - sum_{y in B} b(x,y) v(y)) / m(x)`,
/// where `deg` is the full weighted degree, so mass leaks through edges leaving `B`.
#[derive(Debug, Clone)]
pub struct DirichletSystem {
    pub vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    pub measure: Vec<f64>,
    pub degree: Vec<f64>,
    /// Weights to neighbors inside the set, by index.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl DirichletSystem {
    pub fn from_vertices(g: &dyn Graph, vertices: &[Vertex]) -> Result<Self> {
        let index: HashMap<Vertex, usize> = vertices.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        if index.len() != vertices.len() {
            return Err(Error::InvalidArgument("repeated vertex in Dirichlet set".into()));
        }
        let mut measure = Vec::with_capacity(vertices.len());
        let mut degree = Vec::with_capacity(vertices.len());
        let mut rows = Vec::with_capacity(vertices.len());
        for &x in vertices {
            if !g.contains(x) {
                return Err(Error::UnknownVertex(x));
            }
            let mut deg = 0.0;
            let mut row = Vec::new();
            for (y, w) in g.neighbors(x)? {
                deg += w;
                if let Some(&j) = index.get(&y) {
                    row.push((j, w));
                }
            }
            measure.push(g.measure(x));
            degree.push(deg);
            rows.push(row);
        }
        Ok(Self { vertices: vertices.to_vec(), index, measure, degree, rows })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, x: Vertex) -> Option<usize> {
        self.index.get(&x).copied()
    }

    /// `L_R v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let off: f64 = self.rows[i].iter().map(|&(j, w)| w * v[j]).sum();
                (self.degree[i] * v[i] - off) / self.measure[i]
            })
            .collect()
    }

    /// Row-major dense copy of `L_R`.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = self.degree[i] / self.measure[i];
            for &(j, w) in &self.rows[i] {
                row[j] -= w / self.measure[i];
            }
        }
        a
    }
}

/// Dirichlet restriction of `g` to a ball.
pub fn dirichlet_restriction(g: &dyn Graph, ball: &BallReport) -> Result<DirichletSystem> {
    if ball.truncated {
        return Err(Error::TruncatedBall { radius: ball.radius, budget: ball.vertices.len() });
    }
    DirichletSystem::from_vertices(g, &ball.vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraph, LazyGraph};

    #[test]
    fn line_ball_is_tridiagonal() {
        let g = LazyGraph::new(|x| vec![(Vertex(x.0 - 1), 1.0), (Vertex(x.0 + 1), 1.0)], |_| 1.0, |_| true, 2);
        let sys = DirichletSystem::from_vertices(&g, &[Vertex(-1), Vertex(0), Vertex(1)]).unwrap();
        assert_eq!(sys.dense(), vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
    }

    #[test]
    fn isolated_vertex_gives_zero_matrix() {
        let mut g = FiniteGraph::new();
        g.add_vertex(Vertex(0), 1.0);
        let sys = DirichletSystem::from_vertices(&g, &[Vertex(0)]).unwrap();
        assert_eq!(sys.dense(), vec![vec![0.0]]);
    }

    #[test]
    fn whole_graph_has_zero_row_sums() {
        let mut g = FiniteGraph::path(4, 1.5);
        g.set_measure(Vertex(2), 3.0).unwrap();
        let sys = DirichletSystem::from_vertices(&g, &g.vertices().unwrap()).unwrap();
        for row in sys.dense() {
            assert!(row.iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn truncated_ball_is_rejected() {
        let g = FiniteGraph::path(2, 1.0);
        let ball = BallReport { radius: 1.0, vertices: vec![Vertex(0)], volume: 1.0, truncated: true };
        assert!(matches!(dirichlet_restriction(&g, &ball), Err(Error::TruncatedBall { .. })));
    }
}
