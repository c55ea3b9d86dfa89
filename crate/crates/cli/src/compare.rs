//! Multi-image comparison table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use delcodec_core::{delentropy, encode, EdgeMode, KernelSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{read_image, CliError, CliResult, EXIT_MALFORMED};

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub first_order: f64,
    pub delentropy: f64,
    /// Pair-symbol entropy per pixel; `None` for odd dimensions.
    pub pair_bpp: Option<f64>,
    /// Achieved container rate; `None` when the image cannot be encoded.
    pub codec_bpp: Option<f64>,
    /// Manifest values, verbatim, by label.
    pub external: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema: &'static str,
    pub schema_version: u32,
    pub kernel: String,
    pub edge: String,
    pub pgs: bool,
    pub labels: Vec<String>,
    pub rows: Vec<CompareRow>,
}

/// `image label bpp` per line; `#` starts a comment.
pub type Manifest = Vec<(String, String, String)>;

pub fn parse_manifest(text: &str) -> CliResult<Manifest> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CliError::new(
                EXIT_MALFORMED,
                format!("manifest line {}: expected `image label bpp`", lineno + 1),
            ));
        }
        if fields[2].parse::<f64>().is_err() {
            return Err(CliError::new(
                EXIT_MALFORMED,
                format!("manifest line {}: {:?} is not a number", lineno + 1, fields[2]),
            ));
        }
        out.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
        ));
    }
    Ok(out)
}

pub fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn row_for(path: &Path, kernel: &KernelSpec, edge: EdgeMode, pgs: bool) -> CliResult<CompareRow> {
    let img = read_image(path)?;
    let report = delentropy(&img, kernel, edge, pgs)?;
    let codec_bpp = encode(&img).ok().map(|(_, s)| s.bpp);
    Ok(CompareRow {
        name: image_name(path),
        width: img.width(),
        height: img.height(),
        bit_depth: img.depth().bits(),
        first_order: report.first_order,
        delentropy: report.delentropy,
        pair_bpp: report.quincunx_bpp,
        codec_bpp,
        external: BTreeMap::new(),
    })
}

pub fn build_report(
    inputs: &[PathBuf],
    manifest: &Manifest,
    kernel: &KernelSpec,
    edge: EdgeMode,
    pgs: bool,
) -> CliResult<CompareReport> {
    let rows: Vec<CliResult<CompareRow>> = inputs.par_iter().map(|p| row_for(p, kernel, edge, pgs)).collect();
    let mut rows = rows.into_iter().collect::<CliResult<Vec<_>>>()?;
    let mut labels: Vec<String> = Vec::new();
    for (image, label, bpp) in manifest {
        let matched = rows.iter_mut().zip(inputs).find(|(r, path)| {
            r.name == *image || path.file_name().is_some_and(|f| f.to_string_lossy() == *image)
        });
        match matched {
            Some((row, _)) => {
                row.external.insert(label.clone(), bpp.clone());
                if !labels.contains(label) {
                    labels.push(label.clone());
                }
            }
            None => eprintln!("warning: manifest refers to unknown image {image:?}"),
        }
    }
    Ok(CompareReport {
        schema: "delcodec.compare",
        schema_version: 1,
        kernel: kernel.id.name().to_string(),
        edge: match edge {
            EdgeMode::Valid => "valid".into(),
            EdgeMode::Circular => "wrap".into(),
        },
        pgs,
        labels,
        rows,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into())
}

impl CompareReport {
    fn cells(&self, row: &CompareRow) -> Vec<String> {
        let mut c = vec![
            row.name.clone(),
            format!("{}x{}", row.width, row.height),
            row.bit_depth.to_string(),
            format!("{:.6}", row.first_order),
            format!("{:.6}", row.delentropy),
            opt(row.pair_bpp),
            opt(row.codec_bpp),
        ];
        for l in &self.labels {
            c.push(row.external.get(l).cloned().unwrap_or_else(|| "-".into()));
        }
        c
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["image", "dims", "depth", "H1", "Hdel", "Hpair", "delcodec"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(self.labels.iter().cloned());
        h
    }

    pub fn to_table(&self) -> String {
        let mut rows = vec![self.header()];
        rows.extend(self.rows.iter().map(|r| self.cells(r)));
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in rows {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&self.cells(r).join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lines() {
        let m = parse_manifest("# header\n\nwedge png 0.1\nlena  jpg 4.25 # trailing\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0], ("wedge".into(), "png".into(), "0.1".into()));
        assert_eq!(m[1].2, "4.25");
    }

    #[test]
    fn manifest_errors() {
        assert_eq!(parse_manifest("wedge png").unwrap_err().code, EXIT_MALFORMED);
        assert_eq!(parse_manifest("wedge png fast").unwrap_err().code, EXIT_MALFORMED);
    }

    #[test]
    fn empty_manifest_keeps_internal_columns() {
        let report = CompareReport {
            schema: "delcodec.compare",
            schema_version: 1,
            kernel: "a".into(),
            edge: "valid".into(),
            pgs: true,
            labels: vec![],
            rows: vec![],
        };
        assert_eq!(report.to_csv(), "image,dims,depth,H1,Hdel,Hpair,delcodec\n");
    }
}
