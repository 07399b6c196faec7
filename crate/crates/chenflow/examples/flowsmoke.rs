// Temporary flow check (removed before finalizing).
use chenflow::flow::{run_flow, FlowConfig, FlowFamily, Integrator};
use chenflow::mesh::icosphere;
use std::time::Instant;

fn main() {
    let level: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let stop: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let rebuild: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let mesh = icosphere(1.0, level).unwrap();
    let config = FlowConfig {
        family: FlowFamily::Chen,
        integrator: Integrator::CfSemiimplicit,
        tau_scale: 0.1,
        rebuild_every: rebuild,
        stop_area_fraction: stop,
        diag_every: 200,
        max_steps: 10_000_000,
        ..FlowConfig::default()
    };
    let t0 = Instant::now();
    let traj = run_flow(mesh, &config).unwrap();
    let wall = t0.elapsed().as_secs_f64();
    let t_obs = traj.final_state.t;
    println!(
        "level={level} stop={stop} rebuild={rebuild}: term={:?} steps={} T_obs={:.6} (1/16={:.6}, rel err {:.3e}) wall={:.1}s ({:.1} us/step)",
        traj.termination,
        traj.final_state.step,
        t_obs,
        1.0 / 16.0,
        (t_obs - 1.0 / 16.0).abs() * 16.0,
        wall,
        wall * 1e6 / traj.final_state.step.max(1) as f64
    );
    // radius law at sampled times <= 0.9 T
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        if s.t <= 0.9 / 16.0 {
            let c = s.mesh.centroid();
            let dim = s.mesh.ambient_dim();
            let mut mean_r = 0.0;
            for p in s.mesh.positions().chunks_exact(dim) {
                mean_r += p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            }
            mean_r /= s.mesh.num_vertices() as f64;
            let exact = (1.0f64 - 16.0 * s.t).max(0.0).powf(0.25);
            worst = worst.max((mean_r - exact).abs());
        }
    }
    println!("radius law worst |r_mean - exact| = {:.5}", worst);
    // area decay margins
    let rep = chenflow::analysis::area_decay_check(&traj.records, &config.constants);
    println!("area decay: pass={} worst_margin={:.4e}", rep.pass, rep.worst_margin);
    // tracefree monotonicity
    match chenflow::analysis::tracefree_monotonicity_check(&traj.records, config.constants.eps2) {
        Ok(r) => println!("tracefree: pass={} worst_uptick={:.3e}", r.pass, r.worst_uptick),
        Err(e) => println!("tracefree: {e}"),
    }
}
