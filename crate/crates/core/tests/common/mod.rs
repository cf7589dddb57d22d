#![allow(dead_code)]

use fraccol::denselin::Lu;
use fraccol::specfun::gamma;
use fraccol::stepper::SubdiffusionProblem;

/// L1 scheme on a nonuniform mesh, written from its textbook form:
/// `D^alpha u(t_n) ~ sum_j w_{n,j} (u_j - u_{j-1})` with
/// `w_{n,j} = ((t_n - t_{j-1})^(1-a) - (t_n - t_j)^(1-a)) / (Gamma(2-a) tau_j)`.
pub fn l1_reference(p: &SubdiffusionProblem) -> Vec<Vec<f64>> {
    let op = p.operator().unwrap();
    let lh = op.to_dense();
    let t = p.mesh.nodes();
    let alpha = p.alpha;
    let g = gamma(2.0 - alpha).unwrap();
    let weight = |n: usize, j: usize| {
        ((t[n] - t[j - 1]).powf(1.0 - alpha) - (t[n] - t[j]).powf(1.0 - alpha)) / (g * (t[j] - t[j - 1]))
    };
    let mut u = vec![p.initial_values()];
    for n in 1..t.len() {
        let ann = weight(n, n);
        let mut rhs = p.source_values(t[n], &op).unwrap();
        for x in 0..rhs.len() {
            let memory: f64 = (1..n).map(|j| weight(n, j) * (u[j][x] - u[j - 1][x])).sum();
            rhs[x] += ann * u[n - 1][x] - memory;
        }
        u.push(Lu::new(&lh.add_diagonal(ann)).unwrap().solve(&rhs).unwrap());
    }
    u
}

/// Max nodal error against the manufactured solution at the mesh nodes.
pub fn nodal_error(p: &SubdiffusionProblem, values: &[Vec<f64>]) -> f64 {
    p.mesh
        .nodes()
        .iter()
        .zip(values)
        .map(|(&t, u)| {
            let e = p.exact(t).unwrap();
            e.iter().zip(u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
