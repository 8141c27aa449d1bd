use std::io::Write;

use super::report::{PerReport, ShareRow};

pub const SUMMARY_HEADER: &str = "system\tper\tpct_ins\tpct_del\tpct_sub";
pub const SHARE_HEADER: &str = "phone\tn_languages\toccurrences\terror_rate";

/// Rounds `[ins, del, sub]` percentages to one decimal with the largest-remainder
/// method so that the printed values sum to exactly 100.0 whenever errors exist.
pub fn round_breakdown(report: &PerReport) -> [f64; 3] {
    if report.errors() == 0 {
        return [0.0; 3];
    }
    let raw = [report.pct_ins, report.pct_del, report.pct_sub];
    let mut tenths = [0i64; 3];
    let mut remainders = [0f64; 3];
    for i in 0..3 {
        let scaled = raw[i] * 10.0;
        tenths[i] = scaled.floor() as i64;
        remainders[i] = scaled - tenths[i] as f64;
    }
    let mut missing = 1000 - tenths.iter().sum::<i64>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if missing <= 0 {
            break;
        }
        tenths[i] += 1;
        missing -= 1;
    }
    tenths.map(|t| t as f64 / 10.0)
}

pub fn write_summary_tsv<W: Write>(mut w: W, rows: &[(String, &PerReport)]) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for (system, r) in rows {
        let [ins, del, sub] = round_breakdown(r);
        writeln!(w, "{system}\t{:.1}\t{ins:.1}\t{del:.1}\t{sub:.1}", 100.0 * r.per)?;
    }
    Ok(())
}

pub fn write_share_tsv<W: Write>(mut w: W, rows: &[ShareRow]) -> std::io::Result<()> {
    writeln!(w, "{SHARE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{:.4}",
            r.phone, r.n_languages, r.occurrences, r.error_rate
        )?;
    }
    Ok(())
}
