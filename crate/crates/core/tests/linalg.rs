use adaptive_levin::chebyshev::{cheb_nodes, diff_matrix};
use adaptive_levin::linalg::{qr_solve_pivoted, svd, tsvd_solve, vec_norm, CMatrix, PivotedQr};
use adaptive_levin::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cplx(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| cplx(rng))
}

/// Columns of a random matrix, orthonormalized by repeated Gram–Schmidt.
fn unitary(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| cplx(rng)).collect()).collect();
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let d: Complex64 = (0..n).map(|r| cols[i][r].conj() * cols[j][r]).sum();
                for r in 0..n {
                    let t = cols[i][r];
                    cols[j][r] -= d * t;
                }
            }
        }
        let nrm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= nrm);
    }
    cols
}

/// `U diag(s) V*`, returned with `V` so callers can plant solutions.
fn planted(rng: &mut ChaCha8Rng, s: &[f64]) -> (CMatrix, Vec<Vec<Complex64>>) {
    let n = s.len();
    let u = unitary(rng, n);
    let v = unitary(rng, n);
    let a = CMatrix::from_fn(n, n, |i, j| (0..n).map(|l| u[l][i] * s[l] * v[l][j].conj()).sum());
    (a, v)
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve(a: &CMatrix, y: &[Complex64]) -> Vec<Complex64> {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..n).map(|j| a[(i, j)]).collect();
            row.push(y[i]);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))
            .unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..=n {
                let t = m[c][j];
                m[r][j] -= f * t;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: Complex64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

#[test]
fn singular_values_of_planted_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 5, 12, 16] {
        for _ in 0..5 {
            let mut s: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-6.0..2.0))).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            let (a, _) = planted(&mut rng, &s);
            let f = svd(&a).unwrap();
            for (got, want) in f.sigma.iter().zip(&s) {
                assert!((got - want).abs() <= 1e-12 * s[0], "n={n}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn full_rank_solves_match_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [3, 8, 12] {
        for _ in 0..10 {
            let a = random(&mut rng, n);
            let y: Vec<Complex64> = (0..n).map(|_| cplx(&mut rng)).collect();
            let want = gauss_solve(&a, &y);
            let scale = vec_norm(&want);
            for (x, _) in [
                tsvd_solve(&a, &y, 1e-300).unwrap(),
                qr_solve_pivoted(&a, &y, 1e-300).unwrap(),
            ] {
                let d: Vec<Complex64> = x.iter().zip(&want).map(|(p, q)| p - q).collect();
                assert!(vec_norm(&d) <= 1e-11 * scale.max(1.0));
            }
        }
    }
}

#[test]
fn truncated_solutions_on_planted_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let eps = f64::EPSILON;
    let n = 12;
    for trial in 0..30 {
        let decay = 0.5 + 0.5 * trial as f64;
        let s: Vec<f64> = (0..n).map(|i| 10f64.powf(-decay * i as f64)).collect();
        let (a, _) = planted(&mut rng, &s);
        let xbar: Vec<Complex64> = (0..n).map(|_| cplx(&mut rng)).collect();
        let nx = vec_norm(&xbar);
        let mut y = a.mul_vec(&xbar);
        let e: Vec<Complex64> = (0..n).map(|_| cplx(&mut rng)).collect();
        let ne = vec_norm(&e);
        for (yi, ei) in y.iter_mut().zip(&e) {
            *yi += ei * (eps * s[0] * nx / ne);
        }
        for (z, rep) in [
            tsvd_solve(&a, &y, eps * s[0]).unwrap(),
            qr_solve_pivoted(&a, &y, eps * s[0]).unwrap(),
        ] {
            let r: Vec<Complex64> = a.mul_vec(&z).iter().zip(&y).map(|(p, q)| p - q).collect();
            assert!(vec_norm(&z) <= 10.0 * nx, "trial {trial}: |z| = {}", vec_norm(&z));
            assert!(
                vec_norm(&r) <= 10.0 * eps * s[0] * nx,
                "trial {trial}: residual {}",
                vec_norm(&r)
            );
            assert!(rep.rank_used <= n);
        }
    }
}

#[test]
fn rank_deficient_min_norm_solution_lies_in_row_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 8;
    let s: Vec<f64> = (0..n).map(|i| if i < 5 { 1.0 / (1 + i) as f64 } else { 0.0 }).collect();
    let (a, v) = planted(&mut rng, &s);
    let y = a.mul_vec(&(0..n).map(|_| cplx(&mut rng)).collect::<Vec<_>>());
    for (z, rep) in [
        tsvd_solve(&a, &y, 1e-10).unwrap(),
        qr_solve_pivoted(&a, &y, 1e-10).unwrap(),
    ] {
        assert_eq!(rep.rank_used, 5);
        for vl in &v[5..] {
            let c: Complex64 = vl.iter().zip(&z).map(|(p, q)| p.conj() * q).sum();
            assert!(c.norm() <= 1e-10, "null-space component {c}");
        }
    }
}

#[test]
fn qr_pivots_are_nonincreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let a = random(&mut rng, 12);
    let qr = PivotedQr::factor(&a).unwrap();
    let d = qr.r_diag_abs();
    assert!(d.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-12)));
    let mut p = qr.permutation().to_vec();
    p.sort();
    assert_eq!(p, (0..12).collect::<Vec<_>>());
}

#[test]
fn differentiation_matrix_spectrum() {
    let d = diff_matrix(12).unwrap();
    let a = CMatrix::from_real(12, 12, &d).unwrap();
    let f = svd(&a).unwrap();
    assert!((f.sigma[0] - 68.134_460_737_867_31).abs() <= 1e-10);
    // constants are in the null space
    assert!(f.sigma[11] <= 1e-12);
    assert!(f.sigma[10] > 0.5);
    assert_eq!(cheb_nodes(12).unwrap().len(), 12);
}
