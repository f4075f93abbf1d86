//! Image ingestion: PGM (ascii and binary) rasters and point-cloud CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use moment_triangle::PixelCloud;
use num_complex::Complex64;

/// Supported on-disk image encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    PgmAscii,
    PgmBinary,
    CsvPoints,
}

impl ImageFormat {
    pub fn parse(s: &str) -> Option<ImageFormat> {
        match s {
            "pgm-ascii" => Some(ImageFormat::PgmAscii),
            "pgm-binary" => Some(ImageFormat::PgmBinary),
            "csv-points" | "csv" => Some(ImageFormat::CsvPoints),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ImageFormat::PgmAscii => "pgm-ascii",
            ImageFormat::PgmBinary => "pgm-binary",
            ImageFormat::CsvPoints => "csv-points",
        }
    }
}

/// Which way the raster's row axis points in the complex plane.
///
/// `Up` (the default) maps pixel `(col, row)` to `col + i (H - 1 - row)`, so
/// the image sits in the usual mathematical orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAxis {
    Up,
    Down,
}

#[derive(Debug, Clone)]
pub struct ImageSource {
    pub path: PathBuf,
    pub format: Option<ImageFormat>,
    pub y_axis: YAxis,
}

impl ImageSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            format: None,
            y_axis: YAxis::Up,
        }
    }
}

fn infer_format(path: &Path, bytes: &[u8]) -> Result<ImageFormat> {
    if bytes.starts_with(b"P2") {
        return Ok(ImageFormat::PgmAscii);
    }
    if bytes.starts_with(b"P5") {
        return Ok(ImageFormat::PgmBinary);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(ImageFormat::CsvPoints),
        _ => bail!(
            "cannot infer format of {}: no PGM magic and no .csv extension",
            path.display()
        ),
    }
}

/// Loads a pixel cloud from disk. The format is sniffed from magic bytes and
/// extension; a declared format must agree with the sniffed one.
pub fn load_image(source: &ImageSource) -> Result<PixelCloud> {
    let bytes =
        fs::read(&source.path).with_context(|| format!("reading {}", source.path.display()))?;
    let inferred = infer_format(&source.path, &bytes)?;
    if let Some(declared) = source.format {
        if declared != inferred {
            bail!(
                "{}: declared format {} but the file looks like {}",
                source.path.display(),
                declared.as_str(),
                inferred.as_str()
            );
        }
    }
    match inferred {
        ImageFormat::PgmAscii => parse_pgm_ascii(&bytes, source.y_axis),
        ImageFormat::PgmBinary => parse_pgm_binary(&bytes, source.y_axis),
        ImageFormat::CsvPoints => parse_cloud_csv(std::str::from_utf8(&bytes)?),
    }
}

struct PgmHeader {
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first raster byte (binary) or token (ascii).
    body_start: usize,
}

/// Reads the three header numbers, skipping whitespace and `#` comments.
fn parse_pgm_header(bytes: &[u8], magic: &[u8]) -> Result<PgmHeader> {
    if !bytes.starts_with(magic) {
        bail!("malformed PGM header: bad magic");
    }
    let mut pos = magic.len();
    let mut numbers = [0u32; 3];
    for slot in numbers.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => bail!("malformed PGM header: truncated"),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            bail!("malformed PGM header: expected a number");
        }
        *slot = std::str::from_utf8(&bytes[start..pos])?.parse()?;
    }
    if numbers[0] == 0 || numbers[1] == 0 {
        bail!("malformed PGM header: zero dimension");
    }
    if numbers[2] == 0 || numbers[2] > 65535 {
        bail!("PGM maxval {} out of range (1..=65535)", numbers[2]);
    }
    Ok(PgmHeader {
        width: numbers[0] as usize,
        height: numbers[1] as usize,
        maxval: numbers[2],
        body_start: pos,
    })
}

fn cloud_from_raster(values: Vec<u32>, header: &PgmHeader, y_axis: YAxis) -> Result<PixelCloud> {
    let mut pixels = Vec::new();
    for (index, &value) in values.iter().enumerate() {
        if value > header.maxval {
            bail!("raster value {} exceeds maxval {}", value, header.maxval);
        }
        if value == 0 {
            // Zero intensity carries no mass and would only inflate the
            // pixel budget used by support-rank arguments.
            continue;
        }
        let col = index % header.width;
        let row = index / header.width;
        let y = match y_axis {
            YAxis::Up => (header.height - 1 - row) as f64,
            YAxis::Down => row as f64,
        };
        pixels.push((Complex64::new(col as f64, y), value as f64));
    }
    Ok(PixelCloud::new(pixels)?)
}

fn parse_pgm_ascii(bytes: &[u8], y_axis: YAxis) -> Result<PixelCloud> {
    let header = parse_pgm_header(bytes, b"P2")?;
    let body = std::str::from_utf8(&bytes[header.body_start..])?;
    let mut values = Vec::with_capacity(header.width * header.height);
    for token in body.split_ascii_whitespace() {
        if token.starts_with('#') {
            continue;
        }
        values.push(token.parse::<u32>().context("malformed raster token")?);
    }
    if values.len() != header.width * header.height {
        bail!(
            "truncated raster: expected {} values, found {}",
            header.width * header.height,
            values.len()
        );
    }
    cloud_from_raster(values, &header, y_axis)
}

fn parse_pgm_binary(bytes: &[u8], y_axis: YAxis) -> Result<PixelCloud> {
    let header = parse_pgm_header(bytes, b"P5")?;
    // Exactly one whitespace byte separates maxval from the raster.
    let raster = &bytes[header.body_start + 1..];
    let count = header.width * header.height;
    let values: Vec<u32> = if header.maxval < 256 {
        if raster.len() < count {
            bail!(
                "truncated raster: expected {} bytes, found {}",
                count,
                raster.len()
            );
        }
        raster[..count].iter().map(|&b| b as u32).collect()
    } else {
        if raster.len() < 2 * count {
            bail!(
                "truncated raster: expected {} bytes, found {}",
                2 * count,
                raster.len()
            );
        }
        raster[..2 * count]
            .chunks_exact(2)
            .map(|c| u32::from(c[0]) << 8 | u32::from(c[1]))
            .collect()
    };
    cloud_from_raster(values, &header, y_axis)
}

/// Parses `x,y,intensity` rows; a leading header line is allowed.
pub fn parse_cloud_csv(text: &str) -> Result<PixelCloud> {
    let mut pixels: Vec<(Complex64, f64)> = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            bail!("line {}: expected x,y,intensity", number + 1);
        }
        if number == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header row
        }
        let x: f64 = fields[0]
            .parse()
            .with_context(|| format!("line {}: bad x", number + 1))?;
        let y: f64 = fields[1]
            .parse()
            .with_context(|| format!("line {}: bad y", number + 1))?;
        let w: f64 = fields[2]
            .parse()
            .with_context(|| format!("line {}: bad intensity", number + 1))?;
        if w < 0.0 {
            bail!("line {}: negative intensity {}", number + 1, w);
        }
        let z = Complex64::new(x, y);
        if pixels.iter().any(|&(p, _)| p == z) {
            bail!("line {}: duplicate location ({}, {})", number + 1, x, y);
        }
        pixels.push((z, w));
    }
    Ok(PixelCloud::new(pixels)?)
}

/// Serializes a cloud as `x,y,intensity` with 17 significant digits.
pub fn cloud_to_csv(cloud: &PixelCloud) -> String {
    let mut out = String::from("x,y,intensity\n");
    for p in cloud.pixels() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            p.location.re, p.location.im, p.intensity
        ));
    }
    out
}

/// Reads a list of complex locations from a `x,y[,intensity]` CSV.
pub fn parse_locations_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut locations = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            bail!("line {}: expected x,y", number + 1);
        }
        if number == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        let x: f64 = fields[0].parse()?;
        let y: f64 = fields[1].parse()?;
        locations.push(Complex64::new(x, y));
    }
    if locations.is_empty() {
        Err(anyhow!("no locations found"))
    } else {
        Ok(locations)
    }
}
