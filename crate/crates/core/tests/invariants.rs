use proptest::prelude::*;

use rfa_sim::fem::{
    assemble_convection_skew, assemble_stiffness, CoefficientField, Region, ScalarSpace, VelocityField,
    VelocitySpace,
};
use rfa_sim::mesh::{build_channel_tissue_mesh, mesh_to_string, parse_mesh, rectangle_mesh, GeometryParams, Subdomain};
use rfa_sim::physics::potential_step;
use rfa_sim::materials::MaterialModel;
use rfa_sim::simulation::Checkpoint;
use rfa_sim::sparse::{dot, SolverOptions};

#[test]
fn default_mesh_text_round_trip() {
    let mesh = build_channel_tissue_mesh(&GeometryParams::default()).unwrap();
    let text = mesh_to_string(&mesh);
    let back = parse_mesh(&text).unwrap();
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.triangles(), mesh.triangles());
    assert_eq!(back.subdomains(), mesh.subdomains());
    assert_eq!(mesh_to_string(&back), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn skew_convection_conserves_energy(
        n in 2usize..6,
        seed in proptest::collection::vec(-1.0f64..1.0, 200),
    ) {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 0.7], n, n + 1, Subdomain::Blood).unwrap();
        let space = VelocitySpace::new(&mesh);
        let field = |shift: usize| -> Vec<f64> {
            (0..space.ndofs()).map(|i| seed[(i * 7 + shift) % seed.len()] + 0.01 * i as f64).collect()
        };
        let w = field(0);
        let v = field(3);
        let c = assemble_convection_skew(&space, &VelocityField::from_vector(&mesh, &w).unwrap()).unwrap();
        let e = dot(&v, &c.matvec(&v)).abs();
        prop_assert!(e <= 1e-12 * dot(&v, &v) * dot(&w, &w).sqrt());
    }

    #[test]
    fn stiffness_is_symmetric_with_zero_row_sums(
        coeffs in proptest::collection::vec(0.1f64..10.0, 32),
    ) {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 4, 4, Subdomain::Tissue).unwrap();
        let space = ScalarSpace::new(&mesh, Region::All);
        let k = assemble_stiffness(&space, &CoefficientField::new(coeffs)).unwrap();
        prop_assert!(k.is_symmetric(1e-14));
        let ones = vec![1.0; mesh.num_vertices()];
        prop_assert!(k.matvec(&ones).iter().all(|r| r.abs() < 1e-12 * k.max_abs()));
    }

    #[test]
    fn potential_stays_within_boundary_data(theta_shift in -30.0f64..60.0, drive in 0.1f64..3.0) {
        let g = GeometryParams { mesh_size: 0.075, ..GeometryParams::default() };
        let mesh = build_channel_tissue_mesh(&g).unwrap();
        let theta: Vec<f64> = mesh.vertices().iter().map(|p| 37.0 + theta_shift * p[0] / g.length).collect();
        let sol = potential_step(&mesh, &MaterialModel::default(), &theta, drive, &SolverOptions::default()).unwrap();
        for v in sol.blood.iter().chain(&sol.tissue) {
            prop_assert!(*v >= -1e-10 * drive && *v <= drive * (1.0 + 1e-10));
        }
    }

    #[test]
    fn checkpoint_bytes_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..40), step in 0usize..10_000) {
        let nv = values.len();
        let nt = nv.div_ceil(2);
        let mesh_free = rfa_sim::physics::FieldState {
            t: step as f64 * 0.01,
            step,
            velocity: VelocityField {
                nodal: values.iter().map(|x| [*x, -x]).collect(),
                bubble: vec![[0.5, f64::EPSILON]; nt],
            },
            pressure: values.clone(),
            theta: values.iter().map(|x| x + 37.0).collect(),
            phi_blood: values.clone(),
            phi_tissue: values.iter().rev().copied().collect(),
        };
        let c = Checkpoint {
            state: mesh_free,
            theta_older: (step % 2 == 0).then(|| values.clone()),
            joule: CoefficientField::uniform(nt, 1.5),
            artificial_viscosity: CoefficientField::uniform(nt, 0.0),
        };
        prop_assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
    }
}
