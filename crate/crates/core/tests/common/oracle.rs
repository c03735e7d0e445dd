//! Reference computations written independently of the library: brute-force
//! metric counting, exact rational arithmetic for small closed forms, and a
//! cubic root formula.

use assess_core::ml::mlp::MlpNet;

/// Accuracy, macro precision, macro recall, macro F1 by direct counting.
pub fn brute_metrics(truth: &[bool], pred: &[bool]) -> [f64; 4] {
    let n = truth.len();
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    let mut per_class = Vec::new();
    for class in [true, false] {
        let predicted = pred.iter().filter(|&&p| p == class).count();
        let actual = truth.iter().filter(|&&t| t == class).count();
        let hit = truth.iter().zip(pred).filter(|(&t, &p)| t == class && p == class).count();
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        per_class.push((div(hit, predicted), div(hit, actual), div(2 * hit, predicted + actual)));
    }
    let (p, n_) = (per_class[0], per_class[1]);
    [
        if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        (p.0 + n_.0) / 2.0,
        (p.1 + n_.1) / 2.0,
        (p.2 + n_.2) / 2.0,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Q {
    pub n: i128,
    pub d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Q {
    pub fn new(n: i128, d: i128) -> Q {
        assert!(d != 0);
        let g = gcd(n, d).max(1) * d.signum();
        Q { n: n / g, d: d / g }
    }
    pub fn int(n: i128) -> Q {
        Q::new(n, 1)
    }
    pub fn add(self, o: Q) -> Q {
        Q::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }
    pub fn sub(self, o: Q) -> Q {
        Q::new(self.n * o.d - o.n * self.d, self.d * o.d)
    }
    pub fn mul(self, o: Q) -> Q {
        Q::new(self.n * o.n, self.d * o.d)
    }
    pub fn div(self, o: Q) -> Q {
        Q::new(self.n * o.d, self.d * o.n)
    }
    pub fn f(self) -> f64 {
        self.n as f64 / self.d as f64
    }
}

fn mean(rows: &[[i128; 2]]) -> [Q; 2] {
    let k = rows.len() as i128;
    [Q::new(rows.iter().map(|r| r[0]).sum(), k), Q::new(rows.iter().map(|r| r[1]).sum(), k)]
}

/// The fixed two-class, eight-point set.
pub const LDA_CLASS0: [[i128; 2]; 4] = [[1, 2], [2, 3], [3, 3], [2, 1]];
pub const LDA_CLASS1: [[i128; 2]; 4] = [[5, 6], [6, 5], [7, 8], [6, 7]];

/// `Sw^-1 (mu1 - mu0)` in exact arithmetic, via the 2x2 adjugate.
pub fn lda_closed_form() -> [Q; 2] {
    let m0 = mean(&LDA_CLASS0);
    let m1 = mean(&LDA_CLASS1);
    let mut s = [[Q::int(0); 2]; 2];
    for (rows, m) in [(&LDA_CLASS0, m0), (&LDA_CLASS1, m1)] {
        for r in rows.iter() {
            let c = [Q::int(r[0]).sub(m[0]), Q::int(r[1]).sub(m[1])];
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] = s[i][j].add(c[i].mul(c[j]));
                }
            }
        }
    }
    let det = s[0][0].mul(s[1][1]).sub(s[0][1].mul(s[1][0]));
    let diff = [m1[0].sub(m0[0]), m1[1].sub(m0[1])];
    [
        s[1][1].mul(diff[0]).sub(s[0][1].mul(diff[1])).div(det),
        s[0][0].mul(diff[1]).sub(s[1][0].mul(diff[0])).div(det),
    ]
}

/// Fixed 3-D sample whose covariance has three distinct eigenvalues.
pub const PCA_POINTS: [[i128; 3]; 6] = [[2, 0, 1], [4, 1, 3], [1, 3, 2], [5, 4, 7], [3, 2, 2], [6, 5, 4]];

/// Sample covariance (divisor n - 1) of [`PCA_POINTS`], exactly.
pub fn pca_covariance() -> [[Q; 3]; 3] {
    let n = PCA_POINTS.len() as i128;
    let m: Vec<Q> = (0..3).map(|j| Q::new(PCA_POINTS.iter().map(|p| p[j]).sum(), n)).collect();
    let mut c = [[Q::int(0); 3]; 3];
    for p in &PCA_POINTS {
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = c[i][j].add(Q::int(p[i]).sub(m[i]).mul(Q::int(p[j]).sub(m[j])));
            }
        }
    }
    c.map(|row| row.map(|v| v.div(Q::int(n - 1))))
}

/// Roots of `det(lambda I - C)`, largest first. Coefficients are exact; the
/// depressed cubic is solved in trigonometric form and polished by Newton.
pub fn characteristic_roots(c: &[[Q; 3]; 3]) -> [f64; 3] {
    let tr = c[0][0].add(c[1][1]).add(c[2][2]);
    let minor = |i: usize, j: usize| c[i][i].mul(c[j][j]).sub(c[i][j].mul(c[j][i]));
    let m2 = minor(0, 1).add(minor(0, 2)).add(minor(1, 2));
    let det = c[0][0]
        .mul(minor(1, 2))
        .sub(c[0][1].mul(c[1][0].mul(c[2][2]).sub(c[1][2].mul(c[2][0]))))
        .add(c[0][2].mul(c[1][0].mul(c[2][1]).sub(c[1][1].mul(c[2][0]))));
    // lambda^3 + a lambda^2 + b lambda + k
    let (a, b, k) = (-tr.f(), m2.f(), -det.f());
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + k;
    let r = 2.0 * (-p / 3.0).sqrt();
    let phi = ((3.0 * q / (p * r)).clamp(-1.0, 1.0)).acos() / 3.0;
    let mut roots: Vec<f64> =
        (0..3).map(|i| r * (phi - 2.0 * std::f64::consts::PI * i as f64 / 3.0).cos() - a / 3.0).collect();
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*x + a) * *x + b) * *x + k;
            let df = (3.0 * *x + 2.0 * a) * *x + b;
            if df != 0.0 {
                *x -= f / df;
            }
        }
    }
    roots.sort_by(|u, v| v.total_cmp(u));
    [roots[0], roots[1], roots[2]]
}

/// Relative error `|g - n| / (|g| + |n|)` between the analytic gradient and
/// central differences with step `h`, over the whole parameter vector.
pub fn gradient_rel_error(net: &MlpNet, x: &[Vec<f64>], y: &[f64], h: f64) -> f64 {
    let g = net.gradient(x, y);
    let mut probe = net.clone();
    let mut diff2 = 0.0;
    let mut a2 = 0.0;
    let mut n2 = 0.0;
    for i in 0..net.params.len() {
        let base = net.params[i];
        probe.params[i] = base + h;
        let up = probe.loss(x, y);
        probe.params[i] = base - h;
        let down = probe.loss(x, y);
        probe.params[i] = base;
        let num = (up - down) / (2.0 * h);
        diff2 += (g[i] - num).powi(2);
        a2 += g[i] * g[i];
        n2 += num * num;
    }
    diff2.sqrt() / (a2.sqrt() + n2.sqrt()).max(f64::MIN_POSITIVE)
}
