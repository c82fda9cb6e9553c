use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn approx(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
}

/// Closed lens-shaped test section: TE -> upper -> LE -> lower -> TE.
fn lens_section(chord: f64, half_thick: f64, y: f64) -> Vec<Point3> {
    vec![
        Point3::new(chord, y, 0.0),
        Point3::new(0.5 * chord, y, half_thick),
        Point3::new(0.0, y, 0.0),
        Point3::new(0.5 * chord, y, -half_thick),
        Point3::new(chord, y, 0.0),
    ]
}

fn lens_wing(span: f64, root_chord: f64, tip_chord: f64) -> SurfaceGrid {
    let mut pts = lens_section(root_chord, 0.08 * root_chord, 0.0);
    pts.extend(lens_section(tip_chord, 0.08 * tip_chord, span));
    SurfaceGrid::new(2, 5, pts).unwrap()
}

fn random_grid(rng: &mut ChaCha8Rng, m: usize, n: usize) -> SurfaceGrid {
    let pts = (0..m * n)
        .map(|idx| {
            let s = idx / n;
            Point3::new(
                rng.random_range(-1.0..1.0),
                s as f64 + rng.random_range(0.0..0.5),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    SurfaceGrid::new(m, n, pts).unwrap()
}

#[test]
fn bernstein_endpoint_interpolation() {
    approx(bernstein(0, 3, 0.0).unwrap(), 1.0, 0.0);
    approx(bernstein(3, 3, 1.0).unwrap(), 1.0, 0.0);
}

#[test]
fn bernstein_hand_values() {
    // 2 * 0.5 * 0.5 and C(4,2) * 0.3^2 * 0.7^2.
    approx(bernstein(1, 2, 0.5).unwrap(), 0.5, 1e-15);
    approx(bernstein(2, 4, 0.3).unwrap(), 0.2646, 1e-12);
}

#[test]
fn bernstein_rejects_bad_index() {
    assert!(matches!(
        bernstein(3, 2, 0.5),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(bernstein(0, 2, 1.5), Err(Error::OutOfDomain(_))));
}

#[test]
fn bernstein_partition_of_unity_and_affine_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let l = rng.random_range(1..=10usize);
        let u: f64 = rng.random_range(0.0..=1.0);
        let sum: f64 = (0..=l).map(|i| bernstein(i, l, u).unwrap()).sum();
        approx(sum, 1.0, 1e-12);
        let centroid: f64 = (0..=l)
            .map(|i| bernstein(i, l, u).unwrap() * i as f64 / l as f64)
            .sum();
        approx(centroid, u, 1e-12);
    }
}

#[test]
fn base_lattice_unit_box_corners() {
    let bb = BoundingBox::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0)).unwrap();
    let lat = base_lattice(&bb, 1, 1, 1).unwrap();
    assert_eq!(lat.point_count(), 8);
    for i in 0..=1usize {
        for j in 0..=1usize {
            for k in 0..=1usize {
                let p = lat.point(i, j, k);
                assert_eq!((p.x, p.y, p.z), (i as f64, j as f64, k as f64));
            }
        }
    }
}

#[test]
fn base_lattice_paper_dims() {
    let bb = BoundingBox::new(Point3::new(0.0, 0.0, -0.1), Point3::new(0.5, 1.0, 0.1)).unwrap();
    let lat = base_lattice(&bb, 3, 7, 1).unwrap();
    assert_eq!(lat.point_counts(), (4, 8, 2));
    assert_eq!(lat.point_count(), 64);
}

#[test]
fn base_lattice_linear_midpoint() {
    let bb = BoundingBox::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0)).unwrap();
    let lat = base_lattice(&bb, 2, 1, 1).unwrap();
    approx(lat.point(1, 0, 0).x, 0.5, 0.0);
}

#[test]
fn base_lattice_rejects_degenerate_axis() {
    let bb = BoundingBox::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 1.0)).unwrap();
    assert!(matches!(
        base_lattice(&bb, 1, 1, 1),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn param_coords_box_corners_and_interior() {
    let bb = BoundingBox::new(Point3::new(0.0, 0.0, 0.0), Point3::new(2.0, 2.0, 2.0)).unwrap();
    let pts = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(2.0, 0.0, 2.0),
        Point3::new(1.0, 0.5, 2.0),
        Point3::new(1.0, 0.0, 1.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(2.0, 2.0, 2.0),
        Point3::new(1.0, 1.5, 2.0),
        Point3::new(1.0, 1.0, 1.0),
    ];
    let grid = SurfaceGrid::new(2, 4, pts).unwrap();
    let pc = param_coords(&grid, &bb).unwrap();
    // Box min maps to (0,0,0).
    assert_eq!((pc.u[0], pc.v[0], pc.w[0]), (0.0, 0.0, 0.0));
    // Box max maps to (1,1,1).
    assert_eq!((pc.u[5], pc.v[5], pc.w[5]), (1.0, 1.0, 1.0));
    // Affine interior map: (1, 0.5, 2) -> (0.5, 0.25, 1.0).
    assert_eq!((pc.u[2], pc.v[2], pc.w[2]), (0.5, 0.25, 1.0));
}

#[test]
fn param_coords_rejects_outside_point() {
    let bb = BoundingBox::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0)).unwrap();
    let mut pts = vec![Point3::new(0.5, 0.0, 0.5); 8];
    pts[6] = Point3::new(1.5, 0.5, 0.5);
    pts[7] = Point3::new(0.5, 1.0, 0.5);
    let grid = SurfaceGrid::new(2, 4, pts).unwrap();
    assert!(matches!(
        param_coords(&grid, &bb),
        Err(Error::OutOfDomain(_))
    ));
}

fn embedded_setup(rng: &mut ChaCha8Rng) -> (SurfaceGrid, ControlLattice, ParamCoords) {
    let base = lens_wing(1.0, 0.4, 0.25);
    let bb = ffd_box(&base).unwrap();
    let lat = base_lattice(&bb, rng.random_range(1..=3), rng.random_range(1..=3), 1).unwrap();
    let pc = param_coords(&base, &bb).unwrap();
    (base, lat, pc)
}

#[test]
fn ffd_zero_delta_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (base, lat, pc) = embedded_setup(&mut rng);
    let zero = vec![Point3::default(); lat.point_count()];
    let out = ffd_deform(&lat, &zero, &pc).unwrap();
    assert!(out.max_abs_diff(&base) <= 1e-10);
}

#[test]
fn ffd_constant_delta_translates() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (base, lat, pc) = embedded_setup(&mut rng);
    let c = Point3::new(0.03, -0.02, 0.05);
    let delta = vec![c; lat.point_count()];
    let out = ffd_deform(&lat, &delta, &pc).unwrap();
    for (p, q) in out.points().iter().zip(base.points()) {
        approx(p.x, q.x + c.x, 1e-12);
        approx(p.y, q.y + c.y, 1e-12);
        approx(p.z, q.z + c.z, 1e-12);
    }
}

#[test]
fn ffd_matches_explicit_triple_sum() {
    // Naive Eq-style oracle: direct 8-term sum on a 2x2x2 lattice.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base = lens_wing(1.0, 0.4, 0.25);
    let bb = ffd_box(&base).unwrap();
    let lat = base_lattice(&bb, 1, 1, 1).unwrap();
    let pc = param_coords(&base, &bb).unwrap();
    let delta: Vec<Point3> = (0..8)
        .map(|_| {
            Point3::new(
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            )
        })
        .collect();
    let out = ffd_deform(&lat, &delta, &pc).unwrap();
    let probe = 3;
    let (u, v, w) = (pc.u[probe], pc.v[probe], pc.w[probe]);
    let mut oracle = Point3::default();
    for i in 0..=1usize {
        for j in 0..=1usize {
            for k in 0..=1usize {
                let bu = if i == 0 { 1.0 - u } else { u };
                let bv = if j == 0 { 1.0 - v } else { v };
                let bw = if k == 0 { 1.0 - w } else { w };
                let cp = lat.point(i, j, k) + delta[lat.index(i, j, k)];
                oracle = oracle + cp * (bu * bv * bw);
            }
        }
    }
    let got = out.points()[probe];
    approx(got.x, oracle.x, 1e-10);
    approx(got.y, oracle.y, 1e-10);
    approx(got.z, oracle.z, 1e-10);
}

#[test]
fn ffd_is_linear_in_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (base, lat, pc) = embedded_setup(&mut rng);
    let rand_delta = |rng: &mut ChaCha8Rng| -> Vec<Point3> {
        (0..lat.point_count())
            .map(|_| {
                Point3::new(
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                )
            })
            .collect()
    };
    let d1 = rand_delta(&mut rng);
    let d2 = rand_delta(&mut rng);
    let (alpha, beta) = (0.7, -1.3);
    let combo: Vec<Point3> = d1
        .iter()
        .zip(&d2)
        .map(|(a, b)| *a * alpha + *b * beta)
        .collect();
    let f = |d: &[Point3]| ffd_deform(&lat, d, &pc).unwrap();
    let (o1, o2, oc) = (f(&d1), f(&d2), f(&combo));
    for idx in 0..base.points().len() {
        let b = base.points()[idx];
        let lhs = oc.points()[idx] - b;
        let rhs = (o1.points()[idx] - b) * alpha + (o2.points()[idx] - b) * beta;
        approx(lhs.x, rhs.x, 1e-10);
        approx(lhs.y, rhs.y, 1e-10);
        approx(lhs.z, rhs.z, 1e-10);
    }
}

#[test]
fn ffd_basis_matrix_matches_deform() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (_, lat, pc) = embedded_setup(&mut rng);
    let ncp = lat.point_count();
    let basis = ffd_basis_matrix(&lat, &pc);
    let delta: Vec<Point3> = (0..ncp)
        .map(|_| Point3::new(rng.random_range(-0.1..0.1), 0.0, rng.random_range(-0.1..0.1)))
        .collect();
    let out = ffd_deform(&lat, &delta, &pc).unwrap();
    for (p, row) in out.points().iter().zip(basis.chunks(ncp)) {
        let x: f64 = row
            .iter()
            .enumerate()
            .map(|(c, w)| w * (lat.points()[c].x + delta[c].x))
            .sum();
        let z: f64 = row
            .iter()
            .enumerate()
            .map(|(c, w)| w * (lat.points()[c].z + delta[c].z))
            .sum();
        approx(p.x, x, 1e-12);
        approx(p.z, z, 1e-12);
    }
}

#[test]
fn ffd_rejects_shape_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (_, lat, pc) = embedded_setup(&mut rng);
    let delta = vec![Point3::default(); lat.point_count() + 1];
    assert!(matches!(
        ffd_deform(&lat, &delta, &pc),
        Err(Error::InvalidArgument(_))
    ));
}

fn hausdorff_oracle(a: &SurfaceGrid, b: &SurfaceGrid) -> f64 {
    let directed = |xs: &[Point3], ys: &[Point3]| -> f64 {
        xs.iter()
            .map(|p| {
                ys.iter()
                    .map(|q| p.dist_sq(q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .sqrt()
    };
    directed(a.points(), b.points()).max(directed(b.points(), a.points()))
}

#[test]
fn hausdorff_identity_and_single_pairs() {
    let g = lens_wing(1.0, 0.4, 0.2);
    assert_eq!(hausdorff(&g, &g), 0.0);
    let a = [Point3::new(0.0, 0.0, 0.0)];
    let b = [Point3::new(3.0, 0.0, 0.0)];
    assert_eq!(directed_hausdorff(&a, &b), 3.0);
    let a2 = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)];
    let b2 = [Point3::new(0.0, 0.0, 0.0), Point3::new(5.0, 0.0, 0.0)];
    assert_eq!(directed_hausdorff(&b2, &a2).max(directed_hausdorff(&a2, &b2)), 4.0);
}

#[test]
fn hausdorff_matches_brute_force_on_random_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (ma, na) = (rng.random_range(2..6), rng.random_range(4..9));
        let (mb, nb) = (rng.random_range(2..6), rng.random_range(4..9));
        let a = random_grid(&mut rng, ma, na);
        let b = random_grid(&mut rng, mb, nb);
        assert_eq!(hausdorff(&a, &b), hausdorff_oracle(&a, &b));
        // Symmetry is structural; check anyway.
        assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
        assert!(hausdorff(&a, &b) >= 0.0);
    }
}

#[test]
fn hausdorff_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let a = random_grid(&mut rng, 3, 5);
        let b = random_grid(&mut rng, 4, 6);
        let c = random_grid(&mut rng, 2, 7);
        let (ab, bc, ac) = (hausdorff(&a, &b), hausdorff(&b, &c), hausdorff(&a, &c));
        assert!(ac <= ab + bc + 1e-12);
    }
}

#[test]
fn mse_examples() {
    let g = lens_wing(1.0, 0.4, 0.2);
    assert_eq!(mse_fit_error(&g, &g).unwrap(), 0.0);
    let shift = |d: Point3| {
        SurfaceGrid::new(
            g.m(),
            g.n(),
            g.points().iter().map(|p| *p + d).collect(),
        )
        .unwrap()
    };
    approx(
        mse_fit_error(&g, &shift(Point3::new(1.0, 0.0, 0.0))).unwrap(),
        1.0,
        1e-12,
    );
    approx(
        mse_fit_error(&g, &shift(Point3::new(0.3, 0.4, 0.0))).unwrap(),
        0.25,
        1e-12,
    );
}

#[test]
fn mse_rejects_size_mismatch() {
    let g = lens_wing(1.0, 0.4, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = random_grid(&mut rng, 2, 6);
    assert!(matches!(
        mse_fit_error(&g, &h),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn mean_shape_examples() {
    let g = lens_wing(1.0, 0.4, 0.2);
    assert_eq!(mean_shape(std::slice::from_ref(&g)).unwrap(), g);

    let d = Point3::new(0.1, 0.0, -0.2);
    let plus = SurfaceGrid::new(g.m(), g.n(), g.points().iter().map(|p| *p + d).collect()).unwrap();
    let minus =
        SurfaceGrid::new(g.m(), g.n(), g.points().iter().map(|p| *p - d).collect()).unwrap();
    let mid = mean_shape(&[plus, minus]).unwrap();
    assert!(mid.max_abs_diff(&g) <= 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let grids: Vec<SurfaceGrid> = (0..3).map(|_| random_grid(&mut rng, 3, 5)).collect();
    let mean = mean_shape(&grids).unwrap();
    for idx in 0..15 {
        let naive = grids
            .iter()
            .fold(Point3::default(), |acc, g| acc + g.points()[idx])
            * (1.0 / 3.0);
        approx(mean.points()[idx].x, naive.x, 1e-15);
        approx(mean.points()[idx].y, naive.y, 1e-15);
        approx(mean.points()[idx].z, naive.z, 1e-15);
    }

    assert!(matches!(
        mean_shape(&[] as &[SurfaceGrid]),
        Err(Error::InvalidArgument(_))
    ));
}

fn rotate_about_y(grid: &SurfaceGrid, deg: f64) -> SurfaceGrid {
    let (s, c) = deg.to_radians().sin_cos();
    let pts = grid
        .points()
        .iter()
        .map(|p| Point3::new(c * p.x + s * p.z, p.y, -s * p.x + c * p.z))
        .collect();
    SurfaceGrid::new(grid.m(), grid.n(), pts).unwrap()
}

#[test]
fn align_fixes_already_aligned_wing() {
    let g = lens_wing(1.0, 0.4, 0.2);
    let a = align(&g).unwrap();
    assert!(a.max_abs_diff(&g) <= 1e-12);
}

#[test]
fn align_undoes_rotation() {
    let g = lens_wing(1.0, 0.4, 0.2);
    let rotated = rotate_about_y(&g, 10.0);
    let a = align(&rotated).unwrap();
    assert!(a.max_abs_diff(&g) <= 1e-9);
}

#[test]
fn align_scales_span_to_one() {
    let g = lens_wing(4.0, 0.4, 0.2);
    let a = align(&g).unwrap();
    let ys: Vec<f64> = a.points().iter().map(|p| p.y).collect();
    let span = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    approx(span, 1.0, 1e-12);
}

#[test]
fn align_is_idempotent() {
    let g = rotate_about_y(&lens_wing(2.5, 0.5, 0.3), -7.0);
    let once = align(&g).unwrap();
    let twice = align(&once).unwrap();
    assert!(twice.max_abs_diff(&once) <= 1e-9);
}

#[test]
fn align_rejects_zero_chord() {
    let pts = vec![Point3::new(0.0, 0.0, 0.0); 4]
        .into_iter()
        .chain(vec![Point3::new(0.0, 1.0, 0.0); 4])
        .collect();
    let g = SurfaceGrid::new(2, 4, pts).unwrap();
    assert!(matches!(align(&g), Err(Error::Degenerate(_))));
}

#[test]
fn intersection_check_accepts_clean_sections() {
    assert!(!self_intersection_check(&lens_wing(1.0, 0.4, 0.2)));
}

#[test]
fn intersection_check_flags_crossed_surfaces() {
    // Upper and lower surfaces trade places mid-chord: a genuine crossing.
    let crossed = |y: f64| {
        vec![
            Point3::new(1.0, y, 0.0),
            Point3::new(0.66, y, 0.05),
            Point3::new(0.33, y, -0.02),
            Point3::new(0.0, y, 0.0),
            Point3::new(0.33, y, 0.02),
            Point3::new(0.66, y, -0.05),
            Point3::new(1.0, y, 0.0),
        ]
    };
    let mut pts = crossed(0.0);
    pts.extend(crossed(1.0));
    let g = SurfaceGrid::new(2, 7, pts).unwrap();
    assert!(self_intersection_check(&g));
}

#[test]
fn intersection_check_flags_zero_thickness() {
    let flat = |y: f64| {
        vec![
            Point3::new(1.0, y, 0.0),
            Point3::new(0.5, y, 0.0),
            Point3::new(0.0, y, 0.0),
            Point3::new(0.5, y, 0.0),
            Point3::new(1.0, y, 0.0),
        ]
    };
    let mut pts = flat(0.0);
    pts.extend(flat(1.0));
    let g = SurfaceGrid::new(2, 5, pts).unwrap();
    assert!(self_intersection_check(&g));
}

#[test]
fn signed_area_orientation() {
    let ccw = [(1.0, 0.0), (0.5, 0.1), (0.0, 0.0), (0.5, -0.1)];
    assert!(polygon_signed_area(&ccw) > 0.0);
    let cw: Vec<(f64, f64)> = ccw.iter().rev().cloned().collect();
    assert!(polygon_signed_area(&cw) < 0.0);
    assert!(polygon_is_simple(&ccw));
}
