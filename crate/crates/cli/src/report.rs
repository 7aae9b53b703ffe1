//! CSV report writers with fixed formatting so identical runs produce
//! byte-identical files.

use std::io::{self, Write};

use hotkit_core::loss::LossBreakdown;
use hotkit_core::metrics::MetricReport;

pub const METRICS_HEADER: &str = "image_id,sc_acc,c_acc,miou,wiou,ad_acc,\
iou_c1,iou_c2,iou_c3,iou_c4,iou_c5,iou_c6,iou_c7,iou_c8,iou_c9,iou_c10,\
iou_c11,iou_c12,iou_c13,iou_c14,iou_c15,iou_c16,iou_c17";

pub const LOSS_HEADER: &str = "image_id,ce,local_jl,global_jl,prompt_be,total";

fn metric_row(image_id: &str, report: &MetricReport) -> String {
    let mut row = format!(
        "{image_id},{:.6},{:.6},{:.6},{:.6},{:.6}",
        report.sc_acc, report.c_acc, report.miou, report.wiou, report.ad_acc
    );
    for iou in &report.per_class_iou {
        match iou {
            Some(v) => row.push_str(&format!(",{v:.6}")),
            None => row.push(','),
        }
    }
    row
}

/// Per-image rows followed by one `aggregate` row.
pub fn write_metrics_csv<W: Write>(
    mut out: W,
    rows: &[(String, MetricReport)],
    aggregate: &MetricReport,
) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for (image_id, report) in rows {
        writeln!(out, "{}", metric_row(image_id, report))?;
    }
    writeln!(out, "{}", metric_row("aggregate", aggregate))?;
    Ok(())
}

pub fn write_loss_csv<W: Write>(
    mut out: W,
    rows: &[(String, LossBreakdown)],
) -> io::Result<()> {
    writeln!(out, "{LOSS_HEADER}")?;
    for (image_id, b) in rows {
        writeln!(
            out,
            "{image_id},{:.9},{:.9},{:.9},{:.9},{:.9}",
            b.ce, b.local_jl, b.global_jl, b.prompt_be, b.total
        )?;
    }
    Ok(())
}

pub fn format_aggregate_line(aggregate: &MetricReport) -> String {
    format!(
        "aggregate: sc_acc={:.6} c_acc={:.6} miou={:.6} wiou={:.6} ad_acc={:.6}",
        aggregate.sc_acc, aggregate.c_acc, aggregate.miou, aggregate.wiou, aggregate.ad_acc
    )
}
