//! The moment triangle: row `n` holds `C(n,l) * mu_(l, n-l)` for `l = 0..=n`.
//!
//! Row `n` is exactly the vector of Fourier coefficients of the `n`-th order
//! moment of the image's Radon transform (see the `radon` module), which is
//! what makes this arrangement worth naming.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::invariants::MovingFrame;
use crate::moments::{binomial_f64, MomentTable};

/// Which group normalizations have been applied to a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FrameTag {
    Translation,
    Scaling,
    Rotation,
}

impl FrameTag {
    pub const ALL: [FrameTag; 3] = [FrameTag::Translation, FrameTag::Scaling, FrameTag::Rotation];

    pub fn as_str(&self) -> &'static str {
        match self {
            FrameTag::Translation => "translation",
            FrameTag::Scaling => "scaling",
            FrameTag::Rotation => "rotation",
        }
    }

    pub fn parse(s: &str) -> Option<FrameTag> {
        match s {
            "translation" | "trans" => Some(FrameTag::Translation),
            "scaling" | "scale" => Some(FrameTag::Scaling),
            "rotation" | "rotate" => Some(FrameTag::Rotation),
            _ => None,
        }
    }
}

impl fmt::Display for FrameTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rows 0..=order of binomial-weighted moments, plus a record of which
/// invariantizations produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PascalTriangle {
    order: usize,
    rows: Vec<Vec<Complex64>>,
    frame_tags: BTreeSet<FrameTag>,
    frame: Option<MovingFrame>,
}

impl PascalTriangle {
    /// Builds rows 0..=order from a moment grid; `frame_tags` start empty.
    pub fn from_table(table: &MomentTable, order: usize) -> Result<Self> {
        if order > table.order() {
            return Err(Error::OrderExceedsTable {
                requested: order,
                available: table.order(),
            });
        }
        let rows = (0..=order)
            .map(|n| {
                (0..=n)
                    .map(|l| table.entry(l, n - l) * binomial_f64(n, l))
                    .collect()
            })
            .collect();
        Ok(Self {
            order,
            rows,
            frame_tags: BTreeSet::new(),
            frame: None,
        })
    }

    /// Wraps explicit rows; row `n` must have `n + 1` entries.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyCloud);
        }
        for (n, row) in rows.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(Error::LengthMismatch {
                    expected: n + 1,
                    found: row.len(),
                });
            }
        }
        Ok(Self {
            order: rows.len() - 1,
            rows,
            frame_tags: BTreeSet::new(),
            frame: None,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.rows[n]
    }

    pub fn entry(&self, n: usize, l: usize) -> Complex64 {
        self.rows[n][l]
    }

    pub fn frame_tags(&self) -> &BTreeSet<FrameTag> {
        &self.frame_tags
    }

    pub fn frame(&self) -> Option<&MovingFrame> {
        self.frame.as_ref()
    }

    pub(crate) fn with_frame(mut self, tags: BTreeSet<FrameTag>, frame: MovingFrame) -> Self {
        self.frame_tags = tags;
        self.frame = Some(frame);
        self
    }

    /// The moment `mu_(l, n-l)` encoded by entry `l` of row `n`.
    pub fn moment(&self, n: usize, l: usize) -> Result<Complex64> {
        if n > self.order || l > n {
            return Err(Error::MomentUnavailable { j: l, l: n - l });
        }
        Ok(self.rows[n][l] / binomial_f64(n, l))
    }

    /// Largest relative disagreement between entries that must be conjugate
    /// mirrors of each other (`row n entry l` vs `row n entry n-l`).
    pub fn conjugate_row_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, row) in self.rows.iter().enumerate() {
            for l in 0..=n / 2 {
                let a = row[l];
                let b = row[n - l];
                worst = worst.max((a - b.conj()).norm() / (1.0 + a.norm() + b.norm()));
            }
        }
        worst
    }
}
