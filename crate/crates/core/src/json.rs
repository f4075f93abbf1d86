//! JSON serialization. Complex numbers travel as `[re, im]` pairs; a
//! triangle is `{"order": r, "frame_tags": [...], "rows": [[...], ...]}`
//! with optional frame metadata when it was invariantized.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cloud::AffineRecord;
use crate::error::{Error, Result};
use crate::invariants::MovingFrame;
use crate::moments::MomentTable;
use crate::symmetry::{AxisVerdict, SymmetryReport};
use crate::triangle::{FrameTag, PascalTriangle};

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Json {
        message: e.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
struct FrameDto {
    z0: [f64; 2],
    lambda: f64,
    theta0: f64,
    degenerate_scale: bool,
    degenerate_rotation: bool,
}

impl From<&MovingFrame> for FrameDto {
    fn from(f: &MovingFrame) -> Self {
        Self {
            z0: pair(f.z0),
            lambda: f.lambda,
            theta0: f.theta0,
            degenerate_scale: f.degenerate_scale,
            degenerate_rotation: f.degenerate_rotation,
        }
    }
}

impl From<FrameDto> for MovingFrame {
    fn from(d: FrameDto) -> Self {
        Self {
            z0: unpair(d.z0),
            lambda: d.lambda,
            theta0: d.theta0,
            degenerate_scale: d.degenerate_scale,
            degenerate_rotation: d.degenerate_rotation,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NormalizationDto {
    shift: [f64; 2],
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct TriangleDto {
    order: usize,
    frame_tags: Vec<String>,
    rows: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<FrameDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalization: Option<NormalizationDto>,
}

pub fn triangle_to_json(triangle: &PascalTriangle) -> String {
    triangle_to_json_with(triangle, None)
}

/// Serializes a triangle; `normalization`, when given, records the
/// coordinate map applied to the image before its moments were computed.
pub fn triangle_to_json_with(
    triangle: &PascalTriangle,
    normalization: Option<&AffineRecord>,
) -> String {
    let dto = TriangleDto {
        order: triangle.order(),
        frame_tags: triangle
            .frame_tags()
            .iter()
            .map(|t| t.to_string())
            .collect(),
        rows: triangle
            .rows()
            .iter()
            .map(|row| row.iter().map(|&z| pair(z)).collect())
            .collect(),
        frame: triangle.frame().map(FrameDto::from),
        normalization: normalization.map(|r| NormalizationDto {
            shift: pair(r.shift),
            scale: r.scale,
        }),
    };
    serde_json::to_string_pretty(&dto).expect("triangle serializes")
}

pub fn triangle_from_json(text: &str) -> Result<(PascalTriangle, Option<AffineRecord>)> {
    let dto: TriangleDto = serde_json::from_str(text).map_err(json_err)?;
    if dto.rows.len() != dto.order + 1 {
        return Err(Error::LengthMismatch {
            expected: dto.order + 1,
            found: dto.rows.len(),
        });
    }
    let rows: Vec<Vec<Complex64>> = dto
        .rows
        .into_iter()
        .map(|row| row.into_iter().map(unpair).collect())
        .collect();
    let triangle = PascalTriangle::from_rows(rows)?;
    let record = match dto.normalization {
        Some(n) => Some(AffineRecord::new(unpair(n.shift), n.scale)?),
        None => None,
    };
    let mut tags = BTreeSet::new();
    for name in &dto.frame_tags {
        let tag = FrameTag::parse(name).ok_or_else(|| Error::Json {
            message: format!("unknown frame tag {name:?}"),
        })?;
        tags.insert(tag);
    }
    if tags.is_empty() && dto.frame.is_none() {
        return Ok((triangle, record));
    }
    let frame = dto
        .frame
        .map(MovingFrame::from)
        .unwrap_or_else(MovingFrame::identity);
    Ok((triangle.with_frame(tags, frame), record))
}

#[derive(Serialize, Deserialize)]
struct TableDto {
    order: usize,
    entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalization: Option<NormalizationDto>,
}

/// Serializes a moment grid; `normalization`, when given, records the
/// coordinate map that was applied before computing the moments.
pub fn table_to_json(table: &MomentTable, normalization: Option<&AffineRecord>) -> String {
    let dim = table.order() + 1;
    let dto = TableDto {
        order: table.order(),
        entries: (0..dim)
            .map(|j| (0..dim).map(|l| pair(table.entry(j, l))).collect())
            .collect(),
        normalization: normalization.map(|r| NormalizationDto {
            shift: pair(r.shift),
            scale: r.scale,
        }),
    };
    serde_json::to_string_pretty(&dto).expect("table serializes")
}

pub fn table_from_json(text: &str) -> Result<(MomentTable, Option<AffineRecord>)> {
    let dto: TableDto = serde_json::from_str(text).map_err(json_err)?;
    let dim = dto.order + 1;
    if dto.entries.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            found: dto.entries.len(),
        });
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in &dto.entries {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        entries.extend(row.iter().map(|&p| unpair(p)));
    }
    let table = MomentTable::from_entries(dto.order, entries)?;
    let record = match dto.normalization {
        Some(n) => Some(AffineRecord::new(unpair(n.shift), n.scale)?),
        None => None,
    };
    Ok((table, record))
}

#[derive(Serialize)]
struct ReportDto {
    elongation: Option<f64>,
    is_line: bool,
    frs_folds: Vec<FoldDto>,
    reflection_axis: Option<f64>,
    covariance: [[f64; 2]; 2],
    horizontal_score: Option<f64>,
    axis_angles: [f64; 3],
    axis_verdict: String,
    axis: Option<f64>,
}

#[derive(Serialize)]
struct FoldDto {
    fold: usize,
    residual: f64,
}

pub fn report_to_json(report: &SymmetryReport) -> String {
    let (verdict, axis) = match report.axis_verdict {
        AxisVerdict::SymmetricVertical => ("symmetric-vertical", None),
        AxisVerdict::Symmetric { axis } => ("symmetric", Some(axis)),
        AxisVerdict::NotSymmetric => ("not-symmetric", None),
        AxisVerdict::Indeterminate => ("indeterminate", None),
    };
    let dto = ReportDto {
        elongation: report.elongation,
        is_line: report.is_line,
        frs_folds: report
            .frs_folds
            .iter()
            .map(|f| FoldDto {
                fold: f.fold,
                residual: f.residual,
            })
            .collect(),
        reflection_axis: report.reflection_axis,
        covariance: [
            [report.covariance[(0, 0)], report.covariance[(0, 1)]],
            [report.covariance[(1, 0)], report.covariance[(1, 1)]],
        ],
        horizontal_score: report.horizontal_score,
        axis_angles: report.axis_angles,
        axis_verdict: verdict.to_string(),
        axis,
    };
    serde_json::to_string_pretty(&dto).expect("report serializes")
}
