use crate::compile::Protocol;
use crate::engine::ArchMode;

use super::generate::BenchSpec;
use super::reference::improvement;
use super::table2::RowResult;

/// Schema version for the results CSV; bump on any column change.
pub const CSV_SCHEMA: &str = "qnpu-sim-results-v1";

/// One CSV row of sweep output. Improvement percentages are recomputed from
/// the cycle columns whenever a row is rendered, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub benchmark: String,
    pub qubits: usize,
    pub nodes: usize,
    pub total_remote: usize,
    pub max_remote_per_node: usize,
    pub mode: ArchMode,
    pub width: usize,
    pub cycles: u64,
    pub monolithic_cycles: u64,
}

impl ReportRow {
    pub fn improvement_pct(&self) -> f64 {
        improvement(self.monolithic_cycles, self.cycles)
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.2}",
            self.benchmark,
            self.qubits,
            self.nodes,
            self.total_remote,
            self.max_remote_per_node,
            self.mode,
            self.width,
            self.cycles,
            self.improvement_pct()
        )
    }
}

pub fn rows_from_result(spec: &BenchSpec, r: &RowResult) -> Vec<ReportRow> {
    let base = |mode: ArchMode, width: usize, cycles: u64| ReportRow {
        benchmark: spec.family.name().to_string(),
        qubits: spec.qubits,
        nodes: spec.nodes,
        total_remote: r.counts.total,
        max_remote_per_node: r.counts.max_per_node,
        mode,
        width,
        cycles,
        monolithic_cycles: r.monolithic,
    };
    vec![
        base(ArchMode::Monolithic, 1, r.monolithic),
        base(ArchMode::Decoupled, 1, r.scalar),
        base(ArchMode::Decoupled, 4, r.four_way),
    ]
}

/// Render the results CSV: fixed column order, schema comment header,
/// byte-identical across repeated runs.
pub fn render_csv(rows: &[ReportRow], protocol: Protocol) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema={CSV_SCHEMA} protocol={protocol}\n"));
    out.push_str(
        "benchmark,qubits,nodes,total_remote,max_remote_per_node,mode,width,cycles,improvement_vs_monolithic_pct\n",
    );
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Render the evaluation-table replica as markdown: one row per benchmark
/// configuration, cycle counts and improvements for the three architectures.
pub fn render_markdown(results: &[(BenchSpec, RowResult)]) -> String {
    let mut out = String::new();
    out.push_str("| group | benchmark | #tot. remote | #max. remote/node | monolithic | scalar QNPU | imprv. | 4-way QNPU | imprv. |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for (spec, r) in results {
        let group = if spec.nodes == 5 { "size" } else { "nodes" };
        let qft_note = if spec.family == super::generate::Family::Qft { "*" } else { "" };
        out.push_str(&format!(
            "| {group} | {} | {} | {}{qft_note} | {} | {} | {:.2}% | {} | {:.2}% |\n",
            spec.label(),
            r.counts.total,
            r.counts.max_per_node,
            r.monolithic,
            r.scalar,
            improvement(r.monolithic, r.scalar),
            r.four_way,
            improvement(r.monolithic, r.four_way),
        ));
    }
    out.push_str("\n`*` QFT max-remote-per-node depends on where the final reversal swaps land; totals are construction-independent.\n");
    out
}
