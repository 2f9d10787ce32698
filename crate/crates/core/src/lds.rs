//! Unscrambled Sobol sequence in Gray-code order.
//!
//! Direction numbers are read from a Joe–Kuo style table (one dimension per
//! line: dimension, degree, polynomial coefficient, initial direction
//! numbers). The default table ships with the crate and covers 64
//! dimensions. The all-zeros point at sequence index 0 is never emitted, so
//! the first point of every stream is 0.5 in each coordinate.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

/// Number of bits in each direction number.
const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

static JOE_KUO_64: &str = include_str!("../data/joe_kuo_64.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdsError {
    #[error("sobol dimension must be at least 1")]
    ZeroDimension,
    #[error("sobol dimension {requested} exceeds the direction table ({available} dimensions)")]
    DimensionTooLarge { requested: usize, available: usize },
    #[error("direction table line {line}: {reason}")]
    Table { line: usize, reason: String },
}

/// Direction numbers `v[dim][bit]`, scaled to 32-bit fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionTable {
    directions: Vec<[u32; BITS]>,
}

impl DirectionTable {
    /// The bundled 64-dimensional table.
    pub fn joe_kuo() -> Arc<DirectionTable> {
        static TABLE: OnceLock<Arc<DirectionTable>> = OnceLock::new();
        TABLE
            .get_or_init(|| Arc::new(DirectionTable::parse(JOE_KUO_64).expect("bundled sobol table is valid")))
            .clone()
    }

    /// Parses a table in the Joe–Kuo text format. A header line starting
    /// with a non-digit is skipped, as are blank lines. Dimension 1 is the
    /// van der Corput sequence and is implicit; listed dimensions must
    /// start at 2 and be consecutive.
    pub fn parse(text: &str) -> Result<Self, LdsError> {
        let mut directions = vec![van_der_corput()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || !line.starts_with(|c: char| c.is_ascii_digit()) {
                continue;
            }
            let err = |reason: &str| LdsError::Table {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let fields = line
                .split_whitespace()
                .map(|f| f.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err("non-integer field"))?;
            if fields.len() < 4 {
                return Err(err("expected dimension, degree, coefficient and direction numbers"));
            }
            let (dim, degree, coeff) = (fields[0] as usize, fields[1] as usize, fields[2]);
            let m = &fields[3..];
            if dim != directions.len() + 1 {
                return Err(err("dimensions must be consecutive starting at 2"));
            }
            if degree == 0 || degree >= BITS || m.len() != degree {
                return Err(err("number of direction numbers must equal the degree"));
            }
            for (i, &mi) in m.iter().enumerate() {
                if mi % 2 == 0 || mi >= (1 << (i + 1)) {
                    return Err(err("direction number m_i must be odd and below 2^i"));
                }
            }
            directions.push(recurrence(degree, coeff, m));
        }
        Ok(Self { directions })
    }

    pub fn max_dimension(&self) -> usize {
        self.directions.len()
    }
}

fn van_der_corput() -> [u32; BITS] {
    let mut v = [0u32; BITS];
    for (k, vk) in v.iter_mut().enumerate() {
        *vk = 1u32 << (31 - k);
    }
    v
}

fn recurrence(degree: usize, coeff: u32, m: &[u32]) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    for k in 0..degree {
        v[k] = m[k] << (31 - k);
    }
    for k in degree..BITS {
        let mut value = v[k - degree] ^ (v[k - degree] >> degree);
        for j in 1..degree {
            if (coeff >> (degree - 1 - j)) & 1 == 1 {
                value ^= v[k - j];
            }
        }
        v[k] = value;
    }
    v
}

/// Position in a Sobol stream.
///
/// `index` counts emitted points; the next call to [`SobolState::next_point`]
/// returns sequence element `index + 1`. Two states with equal dimension and
/// index produce identical streams. Clone and [`advance`](SobolState::advance) to
/// get independent parallel streams.
#[derive(Debug, Clone)]
pub struct SobolState {
    table: Arc<DirectionTable>,
    dimension: usize,
    index: u64,
    current: Vec<u32>,
}

impl SobolState {
    pub fn new(dimension: usize) -> Result<Self, LdsError> {
        Self::with_table(dimension, DirectionTable::joe_kuo())
    }

    pub fn with_table(dimension: usize, table: Arc<DirectionTable>) -> Result<Self, LdsError> {
        if dimension == 0 {
            return Err(LdsError::ZeroDimension);
        }
        if dimension > table.max_dimension() {
            return Err(LdsError::DimensionTooLarge {
                requested: dimension,
                available: table.max_dimension(),
            });
        }
        Ok(Self {
            table,
            dimension,
            index: 0,
            current: vec![0; dimension],
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Emits the next point in `[0, 1)^dimension`.
    pub fn next_point(&mut self) -> Vec<f64> {
        let n = self.index + 1;
        assert!(n < 1 << BITS, "sobol stream exhausted");
        let bit = n.trailing_zeros() as usize;
        for (d, x) in self.current.iter_mut().enumerate() {
            *x ^= self.table.directions[d][bit];
        }
        self.index = n;
        self.current.iter().map(|&x| f64::from(x) * SCALE).collect()
    }

    /// Advances the stream by `n` points without emitting them.
    pub fn advance(&mut self, n: u64) {
        if n == 0 {
            return;
        }
        self.index += n;
        let gray = self.index ^ (self.index >> 1);
        for (d, x) in self.current.iter_mut().enumerate() {
            *x = (0..BITS)
                .filter(|&k| (gray >> k) & 1 == 1)
                .fold(0, |acc, k| acc ^ self.table.directions[d][k]);
        }
    }

    /// Returns a copy advanced by `n` points.
    pub fn skipped(&self, n: u64) -> Self {
        let mut s = self.clone();
        s.advance(n);
        s
    }
}

impl Iterator for SobolState {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        (self.index + 1 < 1 << BITS).then(|| self.next_point())
    }
}
