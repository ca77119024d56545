//! Bessel functions of the first kind, integer order.

/// `J_0(x) … J_{n_max}(x)` by Miller's backward recurrence, normalised with
/// `J_0 + 2 Σ J_{2k} = 1`. Stable for every order, including `n > |x|` where
/// forward recurrence loses all digits.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (n_max as f64).max(ax);
    let mut m = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    m += m % 2;

    let mut j_next = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let j_prev = 2.0 * k as f64 / ax * j - j_next;
        j_next = j;
        j = j_prev;
        if k - 1 <= n_max {
            out[k - 1] = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let k = n.unsigned_abs() as usize;
    let v = bessel_j_orders(k, x)[k];
    if n < 0 && k % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Table of `J_n(x)` for `-n_max ≤ n ≤ n_max`, indexable by signed order.
#[derive(Debug, Clone)]
pub struct BesselTable {
    n_max: usize,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn new(n_max: usize, x: f64) -> Self {
        Self {
            n_max,
            values: bessel_j_orders(n_max, x),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `J_n(x)`; zero beyond the tabulated range.
    pub fn get(&self, n: i64) -> f64 {
        let k = n.unsigned_abs() as usize;
        if k > self.n_max {
            return 0.0;
        }
        let v = self.values[k];
        if n < 0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}
