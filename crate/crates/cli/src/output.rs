//! Stable CSV and text rendering.
//!
//! Strikes carry 6 significant digits, errors are scientific with 6
//! significant digits, lines end in LF, and missing values are empty cells.

use crate::report::ReportRow;

/// `x` with `digits` significant digits in positional notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new leading digit (e.g. 999.9996 -> 1000.000).
    let rounded: f64 = s.parse().unwrap_or(x);
    let new_magnitude = rounded.abs().log10().floor() as i64;
    if new_magnitude != magnitude {
        let decimals = (digits as i64 - 1 - new_magnitude).max(0) as usize;
        return format!("{rounded:.decimals$}");
    }
    s
}

pub fn fmt_sci(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn strike(x: f64) -> String {
    fmt_sig(x, 6)
}

pub fn price_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("n_obs,strike_formula\n");
    for row in rows {
        if let ReportRow::Formula { n_obs, quote } = row {
            out += &format!("{},{}\n", n_obs, strike(quote.strike_variance_points));
        }
    }
    out
}

pub fn mc_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("n_obs,strike_mc,std_error,paths,seed\n");
    for row in rows {
        if let ReportRow::MonteCarlo { n_obs, estimate } = row {
            out += &format!(
                "{},{},{},{},{}\n",
                n_obs,
                strike(estimate.strike_estimate),
                fmt_sci(estimate.std_error),
                estimate.n_paths,
                estimate.seed
            );
        }
    }
    out
}

pub fn sweep_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("param,value,n_obs,strike\n");
    for row in rows {
        if let ReportRow::Sweep {
            param,
            value,
            n_obs,
            strike: k,
            ..
        } = row
        {
            out += &format!("{},{},{},{}\n", param, value, n_obs, opt(*k, strike));
        }
    }
    out
}

pub fn compare_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("n_obs,strike_formula,strike_mc,std_error,rel_error\n");
    for row in rows {
        if let ReportRow::Compare {
            n_obs,
            strike_formula,
            estimate,
            rel_error,
        } = row
        {
            out += &format!(
                "{},{},{},{},{}\n",
                n_obs,
                strike(*strike_formula),
                opt(estimate.map(|e| e.strike_estimate), strike),
                opt(estimate.map(|e| e.std_error), fmt_sci),
                opt(*rel_error, fmt_sci),
            );
        }
    }
    out
}

/// Renders CSV text as an aligned table.
pub fn table(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncols)
        .map(|c| {
            rows.iter()
                .map(|r| r.get(c).map_or(0, |s| s.len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{:>w$}", cell, w = widths[c]))
            .collect();
        out += line.join("  ").trim_end();
        out.push('\n');
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * ncols.saturating_sub(1);
            out += &"-".repeat(total);
            out.push('\n');
        }
    }
    out
}
