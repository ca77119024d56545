/// Trailing average of the mechanical position `b + b*` over the lock
/// window τ, as seen by the cavity lock.
///
/// Fixed-capacity ring of ⌈τ/dt⌉ samples with a running sum, so each push is
/// O(1). The sum is rebuilt from the ring once per wrap to stop rounding
/// drift over long runs.
#[derive(Debug, Clone)]
pub struct PdhFilter {
    ring: Vec<f64>,
    head: usize,
    len: usize,
    sum: f64,
}

impl PdhFilter {
    pub fn new(tau: f64, dt: f64) -> Self {
        let capacity = ((tau / dt) - 1e-9).ceil().max(1.0) as usize;
        Self {
            ring: vec![0.0; capacity],
            head: 0,
            len: 0,
            sum: 0.0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.ring.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, position: f64) {
        let cap = self.ring.len();
        if self.len == cap {
            self.sum -= self.ring[self.head];
        } else {
            self.len += 1;
        }
        self.ring[self.head] = position;
        self.sum += position;
        self.head += 1;
        if self.head == cap {
            self.head = 0;
            if self.len == cap {
                self.sum = self.ring.iter().sum();
            }
        }
    }

    /// x_PDH; zero before any sample has been pushed.
    pub fn average(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.sum / self.len as f64
        }
    }
}

/// Window average of a uniformly sampled position record; zero when empty.
pub fn pdh_average(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        0.0
    } else {
        samples.iter().sum::<f64>() / samples.len() as f64
    }
}
