// Scratch: NIPG rates on a flat single patch with a trig solution.
use surface_dg::assembly::{MethodConfig, Variant};
use surface_dg::geometry::Side;
use surface_dg::multipatch::{
    BoundaryRecord, FacetKind, GeometryFile, MultipatchSurface, PatchRecord,
};
use surface_dg::norms::ExactSolution;

struct Trig;

impl ExactSolution<f64> for Trig {
    fn value(&self, x: &[f64; 3]) -> f64 {
        (1.3 * x[0] + 0.4).sin() * (0.9 * x[1]).cos()
    }
    fn surface_gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        [
            1.3 * (1.3 * x[0] + 0.4).cos() * (0.9 * x[1]).cos(),
            -0.9 * (1.3 * x[0] + 0.4).sin() * (0.9 * x[1]).sin(),
            0.0,
        ]
    }
    fn laplacian(&self, x: &[f64; 3]) -> f64 {
        -(1.3f64 * 1.3 + 0.9 * 0.9) * self.value(x)
    }
    fn grad_laplacian(&self, x: &[f64; 3]) -> [f64; 3] {
        let k = -(1.3f64 * 1.3 + 0.9 * 0.9);
        let g = self.surface_gradient(x);
        [k * g[0], k * g[1], 0.0]
    }
    fn source(&self, x: &[f64; 3]) -> f64 {
        let k = 1.3f64 * 1.3 + 0.9 * 0.9;
        (k * k + 1.0) * self.value(x)
    }
}

fn main() {
    let geometry = GeometryFile {
        patches: vec![PatchRecord {
            degrees: [1, 1],
            knots_u: vec![0.0, 0.0, 1.0, 1.0],
            knots_v: vec![0.0, 0.0, 1.0, 1.0],
            control_points: vec![
                [0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
            ],
            weights: vec![1.0; 4],
        }],
        interfaces: vec![],
        boundaries: Side::ALL
            .iter()
            .map(|&side| BoundaryRecord { patch: 0, side, kind: FacetKind::Dirichlet })
            .collect(),
    };
    let mp = MultipatchSurface::<f64>::from_geometry(&geometry).unwrap();
    for p in [2usize, 3] {
        for mult in [1.0, 100.0] {
            let mut config = MethodConfig::<f64>::new(Variant::Nipg, p);
            config.delta0 *= mult;
            config.delta1 *= mult;
            let mut prev = 0.0;
            print!("p={p} delta x{mult:5}: ");
            for level in 0..7 {
                let mesh = mp.refined_mesh(level).unwrap();
                let space = surface_dg::space::DgSpace::new(&mp, &mesh, p).unwrap();
                let (_, err) =
                    surface_dg::harness::solve_tuple(&mp, &mesh, &space, &config, &Trig, false)
                        .unwrap();
                let e = err.dg_norm;
                if level > 0 {
                    print!(" {:+.3}", (prev / e).log2());
                }
                prev = e;
            }
            println!();
        }
    }
}
