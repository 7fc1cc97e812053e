use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// Significant digits for every printed float.
const SIG_DIGITS: i32 = 15;

/// Fixed-point rendering with at least 15 significant digits.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&magnitude) {
        return format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    }
    let decimals = (SIG_DIGITS - 1 - magnitude).max(1) as usize;
    format!("{x:.decimals$}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One experiment outcome. `n` and `bound` are set only for `K_2n`.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub n: Option<usize>,
    pub vertices: usize,
    pub algorithm: &'static str,
    pub level: usize,
    pub value: f64,
    pub optimum: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub wall_time: Option<f64>,
}

impl ExperimentRow {
    pub fn below_bound(&self) -> Option<bool> {
        Some(self.ratio? < self.bound?)
    }

    fn header(&self) -> Vec<&'static str> {
        let mut h = vec![
            "n",
            "vertices",
            "algorithm",
            "level",
            "value",
            "optimum",
            "ratio",
            "bound_1_minus_1_over_8n2",
            "below_bound",
        ];
        if self.wall_time.is_some() {
            h.push("wall_time_s");
        }
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.vertices.to_string(),
            self.algorithm.to_string(),
            self.level.to_string(),
            num(self.value),
            opt_num(self.optimum),
            opt_num(self.ratio),
            opt_num(self.bound),
            self.below_bound()
                .map(|b| b.to_string())
                .unwrap_or_default(),
        ];
        if let Some(t) = self.wall_time {
            f.push(format!("{t:.6}"));
        }
        f
    }

    pub fn print(&self, out: &mut impl Write) -> Result<()> {
        for (k, v) in self.header().iter().zip(self.fields()) {
            if !v.is_empty() {
                writeln!(out, "{k:<26}{v}")?;
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, &self.header(), std::iter::once(self.fields()))
    }
}

pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator,
    I::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn significant(s: &str) -> usize {
        let mantissa = s.split('e').next().unwrap();
        mantissa
            .chars()
            .filter(|c| c.is_ascii_digit())
            .skip_while(|&c| c == '0')
            .count()
    }

    #[test]
    fn at_least_twelve_digits() {
        for x in [
            9.0,
            0.99,
            1.0 - 1.0 / 128.0,
            2.5e-5,
            3.0e-9,
            123456.789,
            -0.2325,
            1e20,
        ] {
            let s = num(x);
            assert!(significant(&s) >= 12, "{x} -> {s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - x).abs() <= 1e-13 * x.abs(), "{x} -> {s}");
        }
    }

    #[test]
    fn zero_and_integers() {
        assert_eq!(num(0.0), "0.00000000000000");
        assert_eq!(num(9.0), "9.00000000000000");
        assert_eq!(num(25.0), "25.0000000000000");
    }

    #[test]
    fn flag_follows_comparison() {
        let mut row = ExperimentRow {
            n: Some(4),
            vertices: 8,
            algorithm: "qaoa",
            level: 1,
            value: 15.0,
            optimum: Some(16.0),
            ratio: Some(15.0 / 16.0),
            bound: Some(1.0 - 1.0 / 128.0),
            wall_time: None,
        };
        assert_eq!(row.below_bound(), Some(true));
        row.ratio = Some(1.0);
        assert_eq!(row.below_bound(), Some(false));
        row.bound = None;
        assert_eq!(row.below_bound(), None);
    }
}
