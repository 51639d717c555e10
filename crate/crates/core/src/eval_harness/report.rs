use super::{MetricName, Metrics, MetricsReport};

pub const REPORT_HEADER: &str = "approach\tL\tmetric\tmean\tstd";
pub const PLOT_HEADER: &str = "L\tf1_mean\tf1_sem";

fn l_field(l: Option<usize>) -> String {
    l.map_or_else(|| "-".to_string(), |l| l.to_string())
}

/// Summary table: one row per approach, L and metric.
pub fn report_tsv(reports: &[MetricsReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        for m in MetricName::ALL {
            let s = r.summary(m);
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{:.4}\n",
                r.approach,
                l_field(r.l),
                m.as_str(),
                s.mean,
                s.std
            ));
        }
    }
    out
}

/// Raw per-repetition metrics and confusion counts.
pub fn repetitions_tsv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("approach\tL\trep\taccuracy\tprecision\trecall\tf1\ttp\tfp\ttn\tfn\n");
    for r in reports {
        for (i, m) in r.repetitions.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{i}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}\t{}\n",
                r.approach,
                l_field(r.l),
                m.accuracy,
                m.precision,
                m.recall,
                m.f1,
                m.tp,
                m.fp,
                m.tn,
                m.fn_
            ));
        }
    }
    out
}

/// Mean F1 and its standard error per window length.
pub fn plot_tsv(reports: &[MetricsReport]) -> String {
    let mut out = format!("{PLOT_HEADER}\n");
    for r in reports {
        let s = r.f1();
        out.push_str(&format!("{}\t{:.4}\t{:.4}\n", l_field(r.l), s.mean, s.sem()));
    }
    out
}

/// Random-guess metrics at one decimal.
pub fn baseline_text(m: &Metrics) -> String {
    format!(
        "accuracy\t{:.1}\nprecision\t{:.1}\nrecall\t{:.1}\nf1\t{:.1}\n",
        m.accuracy, m.precision, m.recall, m.f1
    )
}
