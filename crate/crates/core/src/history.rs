/// Fixed-length ring of the most recent values, newest first.
///
/// `dot(coeffs)` pairs `coeffs[m - 1]` with the m-th most recent value. The
/// summation order is fixed, which is what keeps encoder and decoder
/// reconstructions bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct History {
    buf: Vec<f64>,
    head: usize,
}

impl History {
    pub(crate) fn filled(len: usize, value: f64) -> Self {
        Self {
            buf: vec![value; len],
            head: 0,
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.buf.len()
    }

    pub(crate) fn push(&mut self, value: f64) {
        if self.buf.is_empty() {
            return;
        }
        self.head = if self.head == 0 {
            self.buf.len() - 1
        } else {
            self.head - 1
        };
        self.buf[self.head] = value;
    }

    /// m-th most recent value, 1-based.
    pub(crate) fn get(&self, m: usize) -> f64 {
        debug_assert!(m >= 1 && m <= self.buf.len());
        self.buf[(self.head + m - 1) % self.buf.len()]
    }

    pub(crate) fn dot(&self, coeffs: &[f64]) -> f64 {
        debug_assert_eq!(coeffs.len(), self.buf.len());
        let mut acc = 0.0;
        for (m, c) in coeffs.iter().enumerate() {
            acc += c * self.get(m + 1);
        }
        acc
    }

    /// Values newest first.
    pub(crate) fn to_vec(&self) -> Vec<f64> {
        (1..=self.buf.len()).map(|m| self.get(m)).collect()
    }
}
