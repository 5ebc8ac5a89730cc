//! CSV emission. Headers are fixed, floats carry 9 significant digits and
//! lines end in `\n`, so identical reports give identical bytes.

use std::io::Write;
use std::path::Path;

use super::campaign::{CampaignReport, KAggregate, TrialSummary};
use super::rates::RateTable;
use crate::error::Result;
use crate::metrics::RocCurve;

pub const TRIALS_HEADER: [&str; 8] = ["trial_seed", "K", "mse", "hits", "busy", "false", "idle", "converged"];
pub const AGGREGATE_HEADER: [&str; 7] = ["K", "mean_mse", "Pd", "Pf", "mse_stderr", "pd_stderr", "pf_stderr"];
pub const ROC_HEADER: [&str; 4] = ["K", "lambda", "Pd", "Pf"];
pub const RATES_HEADER: [&str; 3] = ["quantity", "K", "rate_hz"];

/// `printf("%.9g")`: shortest of fixed and exponent notation, trailing
/// zeros dropped.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_trials<W: Write>(w: W, rows: &[TrialSummary]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(TRIALS_HEADER)?;
    for r in rows {
        let c = r.outcome.counts;
        out.write_record([
            r.trial_seed.to_string(),
            r.nodes.to_string(),
            r.outcome.mse.map(fmt_g9).unwrap_or_default(),
            c.detect_hits.to_string(),
            c.busy_count.to_string(),
            c.false_hits.to_string(),
            c.idle_count.to_string(),
            u8::from(r.converged).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(w: W, rows: &[KAggregate]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        out.write_record([
            r.nodes.to_string(),
            fmt_g9(r.mean_mse),
            fmt_g9(r.pd),
            fmt_g9(r.pf),
            fmt_g9(r.mse_stderr),
            fmt_g9(r.pd_stderr),
            fmt_g9(r.pf_stderr),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_roc<W: Write>(w: W, curves: &[(usize, RocCurve)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(ROC_HEADER)?;
    for (k, curve) in curves {
        for p in &curve.points {
            out.write_record([k.to_string(), fmt_g9(p.lambda), fmt_g9(p.pd), fmt_g9(p.pf)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_rates<W: Write>(w: W, t: &RateTable) -> Result<()> {
    let mut out = writer(w);
    out.write_record(RATES_HEADER)?;
    out.write_record(["nyquist_rate", "", &fmt_g9(t.nyquist_rate_hz)])?;
    out.write_record(["existing_cs_rate", "", &fmt_g9(t.existing_cs_rate_hz)])?;
    out.write_record(["per_node_rate", "", &fmt_g9(t.per_node_rate_hz)])?;
    for (k, r) in &t.sum_rate_hz {
        out.write_record(["sum_rate", &k.to_string(), &fmt_g9(*r)])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `aggregate.csv`, `roc.csv` and `rates.csv` into
/// `dir`, creating it if needed.
pub fn write_campaign(dir: &Path, report: &CampaignReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = |name: &str| std::fs::File::create(dir.join(name)).map(std::io::BufWriter::new);
    write_trials(file("trials.csv")?, &report.trials)?;
    write_aggregate(file("aggregate.csv")?, &report.per_k)?;
    write_roc(file("roc.csv")?, &report.roc)?;
    write_rates(file("rates.csv")?, &report.rates)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        // reference strings from C printf("%.9g")
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (6e9, "6e+09"),
            (3.6e9, "3.6e+09"),
            (30e6, "30000000"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (2.0 / 3.0, "0.666666667"),
            (1e-4, "0.0001"),
            (1.5e-5, "1.5e-05"),
            (999999999.5, "1e+09"),
            (0.000123456789123, "0.000123456789"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
        assert_eq!(fmt_g9(f64::NAN), "nan");
    }

    #[test]
    fn rates_csv_bytes() {
        let t = RateTable {
            nyquist_rate_hz: 6e9,
            existing_cs_rate_hz: 3.6e9,
            per_node_rate_hz: 30e6,
            sum_rate_hz: vec![(25, 750e6)],
        };
        let mut buf = Vec::new();
        write_rates(&mut buf, &t).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "quantity,K,rate_hz\nnyquist_rate,,6e+09\nexisting_cs_rate,,3.6e+09\nper_node_rate,,30000000\nsum_rate,25,750000000\n"
        );
    }
}
