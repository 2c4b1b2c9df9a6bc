//! CSV formats. Numbers are written with 17 significant digits so that every
//! `f64` survives a write/read round trip exactly.

use crate::CliError;
use shellzeros::pointprocess::{CorrelationEstimate, RescaledProcess, SpectrumRecord};
use shellzeros::C64;

pub const SPECTRA_HEADER: &str = "realization,seed,h,delta,re,im";
pub const RESCALED_HEADER: &str = "ensemble,z0_re,z0_im,h,R,realization,w_re,w_im";
pub const CORR_HEADER: &str = "bin_lo_r2,bin_hi_r2,pairs,khat,stderr";
pub const CURVES_HEADER: &str = "r2,value,curve_name";

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line: usize) -> Result<f64, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Csv(format!("line {line}: bad number {field:?}")))
}

fn parse_u64(field: &str, line: usize) -> Result<u64, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Csv(format!("line {line}: bad integer {field:?}")))
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => return Err(CliError::Csv(format!("expected header {header:?}"))),
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(CliError::Csv(format!("line {}: expected {width} fields", n + 1)));
        }
        out.push((n + 1, fields));
    }
    Ok(out.into_iter())
}

/// One row per eigenvalue; realizations are numbered in order.
pub fn write_spectra(records: &[SpectrumRecord]) -> String {
    let mut s = String::from(SPECTRA_HEADER);
    s.push('\n');
    for (i, r) in records.iter().enumerate() {
        for z in &r.eigenvalues {
            s.push_str(&format!(
                "{i},{},{},{},{},{}\n",
                r.seed,
                fmt_num(r.h),
                fmt_num(r.delta),
                fmt_num(z.re),
                fmt_num(z.im)
            ));
        }
    }
    s
}

pub fn read_spectra(text: &str, tag: &str) -> Result<Vec<SpectrumRecord>, CliError> {
    let mut out: Vec<SpectrumRecord> = Vec::new();
    let mut current: Option<u64> = None;
    for (n, f) in rows(text, SPECTRA_HEADER)? {
        let real = parse_u64(f[0], n)?;
        let z = C64::new(parse_f64(f[4], n)?, parse_f64(f[5], n)?);
        if current != Some(real) {
            current = Some(real);
            out.push(SpectrumRecord {
                h: parse_f64(f[2], n)?,
                delta: parse_f64(f[3], n)?,
                seed: parse_u64(f[1], n)?,
                ensemble_tag: tag.to_string(),
                eigenvalues: Vec::new(),
            });
        }
        out.last_mut().unwrap().eigenvalues.push(z);
    }
    Ok(out)
}

/// A rescaled ensemble as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledEnsemble {
    pub ensemble: String,
    pub processes: Vec<RescaledProcess>,
}

/// One row per point; a realization without points gets a single row with
/// empty coordinates so the realization count survives.
pub fn write_rescaled(ens: &RescaledEnsemble) -> Result<String, CliError> {
    if ens.ensemble.contains(',') || ens.ensemble.is_empty() {
        return Err(CliError::Csv(format!("ensemble tag {:?} must be nonempty without commas", ens.ensemble)));
    }
    let mut s = String::from(RESCALED_HEADER);
    s.push('\n');
    for (i, p) in ens.processes.iter().enumerate() {
        let prefix = format!(
            "{},{},{},{},{},{i}",
            ens.ensemble,
            fmt_num(p.z0.re),
            fmt_num(p.z0.im),
            fmt_num(p.h),
            fmt_num(p.window_radius)
        );
        if p.points.is_empty() {
            s.push_str(&format!("{prefix},,\n"));
        }
        for w in &p.points {
            s.push_str(&format!("{prefix},{},{}\n", fmt_num(w.re), fmt_num(w.im)));
        }
    }
    Ok(s)
}

pub fn read_rescaled(text: &str) -> Result<RescaledEnsemble, CliError> {
    let mut ensemble = None;
    let mut processes: Vec<RescaledProcess> = Vec::new();
    let mut current: Option<u64> = None;
    for (n, f) in rows(text, RESCALED_HEADER)? {
        let tag = f[0].to_string();
        match &ensemble {
            None => ensemble = Some(tag),
            Some(t) if *t != tag => return Err(CliError::MetadataMismatch(format!("ensembles {t} and {tag}"))),
            _ => {}
        }
        let z0 = C64::new(parse_f64(f[1], n)?, parse_f64(f[2], n)?);
        let h = parse_f64(f[3], n)?;
        let r = parse_f64(f[4], n)?;
        let real = parse_u64(f[5], n)?;
        if current != Some(real) {
            current = Some(real);
            processes.push(RescaledProcess {
                z0,
                h,
                window_radius: r,
                points: Vec::new(),
            });
        }
        let p = processes.last_mut().unwrap();
        if p.z0 != z0 || p.h != h || p.window_radius != r {
            return Err(CliError::MetadataMismatch(format!("line {n}: metadata changes within a realization")));
        }
        if !(f[6].is_empty() && f[7].is_empty()) {
            p.points.push(C64::new(parse_f64(f[6], n)?, parse_f64(f[7], n)?));
        }
    }
    Ok(RescaledEnsemble {
        ensemble: ensemble.unwrap_or_default(),
        processes,
    })
}

pub fn write_corr(est: &CorrelationEstimate) -> String {
    let mut s = String::from(CORR_HEADER);
    s.push('\n');
    for k in 0..est.bins() {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_num(est.bin_edges[k]),
            fmt_num(est.bin_edges[k + 1]),
            est.pair_counts[k],
            fmt_num(est.khat[k]),
            fmt_num(est.stderr[k])
        ));
    }
    s
}

/// Reads bins, counts, estimates and errors; ensemble-level fields are not
/// stored and come back as zero.
pub fn read_corr(text: &str) -> Result<CorrelationEstimate, CliError> {
    let mut est = CorrelationEstimate {
        bin_edges: Vec::new(),
        pair_counts: Vec::new(),
        khat: Vec::new(),
        stderr: Vec::new(),
        realizations: 0,
        pooled_intensity: 0.0,
    };
    for (n, f) in rows(text, CORR_HEADER)? {
        let lo = parse_f64(f[0], n)?;
        let hi = parse_f64(f[1], n)?;
        match est.bin_edges.last() {
            None => est.bin_edges.push(lo),
            Some(&last) if last != lo => return Err(CliError::Csv(format!("line {n}: bins are not contiguous"))),
            _ => {}
        }
        est.bin_edges.push(hi);
        est.pair_counts.push(parse_u64(f[2], n)?);
        est.khat.push(parse_f64(f[3], n)?);
        est.stderr.push(parse_f64(f[4], n)?);
    }
    if est.khat.is_empty() {
        return Err(CliError::Csv("no bins".into()));
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub r2: f64,
    pub value: f64,
    pub curve: String,
}

pub fn write_curves(points: &[CurvePoint]) -> String {
    let mut s = String::from(CURVES_HEADER);
    s.push('\n');
    for p in points {
        s.push_str(&format!("{},{},{}\n", fmt_num(p.r2), fmt_num(p.value), p.curve));
    }
    s
}

pub fn read_curves(text: &str) -> Result<Vec<CurvePoint>, CliError> {
    rows(text, CURVES_HEADER)?
        .map(|(n, f)| {
            Ok(CurvePoint {
                r2: parse_f64(f[0], n)?,
                value: parse_f64(f[1], n)?,
                curve: f[2].to_string(),
            })
        })
        .collect()
}
