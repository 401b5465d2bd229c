//! Dev harness: print improvement bands for a latency model.
use qnpu_sim::bench::{run_table2, table2_specs};
use qnpu_sim::compile::Protocol;
use qnpu_sim::engine::LatencyModel;

fn main() {
    let mut lat = LatencyModel::default();
    let args: Vec<String> = std::env::args().collect();
    for a in &args[1..] {
        let (k, v) = a.split_once('=').expect("key=value");
        let v: u64 = v.parse().unwrap();
        match k {
            "hop" => lat.classical_link_hop = v,
            "zone" => lat.zone_move = v,
            "meas" => lat.measurement = v,
            "decode" => lat.decode = v,
            "uop" => lat.uop_issue = v,
            "epr" => lat.epr_reserve_lookup = v,
            "sig" => lat.qpu_qnpu_signal = v,
            _ => panic!("unknown key {k}"),
        }
    }
    eprintln!("latency: {lat:?}");
    let t0 = std::time::Instant::now();
    let rows = run_table2(&lat, Protocol::Cat);
    eprintln!("sweep took {:?}", t0.elapsed());
    let _ = table2_specs();
    println!("{:<22} {:>6} {:>9} {:>9} {:>7} {:>9} {:>7}", "row", "#tot", "mono", "scalar", "s-imp%", "4way", "f-imp%");
    for (spec, r) in rows {
        let r = r.unwrap();
        let si = (r.monolithic as f64 - r.scalar as f64) / r.monolithic as f64 * 100.0;
        let fi = (r.monolithic as f64 - r.four_way as f64) / r.monolithic as f64 * 100.0;
        println!(
            "{:<22} {:>6} {:>9} {:>9} {:>7.2} {:>9} {:>7.2}",
            spec.label(), r.counts.total, r.monolithic, r.scalar, si, r.four_way, fi
        );
    }
}
