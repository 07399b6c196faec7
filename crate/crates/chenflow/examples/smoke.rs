// Temporary numeric smoke check (removed before finalizing).
use chenflow::mesh::{icosphere, torus, TorusEmbedding};
use chenflow::ops;

fn main() {
    for level in [2u32, 3, 4] {
        let m = icosphere(1.0, level).unwrap();
        let rep = m.validate().unwrap();
        let ops_cache = ops::build_operators(&m).unwrap();
        let area = ops_cache.total_area();
        let h = ops::mean_curvature_vector(&m, &ops_cache);
        // max |H + 2 nu_out|
        let mut hmax: f64 = 0.0;
        for v in 0..m.num_vertices() {
            let p = m.position(v);
            let hv = &h[v * 3..v * 3 + 3];
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let mut err = 0.0;
            for d in 0..3 {
                let e = hv[d] + 2.0 * p[d] / n;
                err += e * e;
            }
            hmax = hmax.max(err.sqrt());
        }
        let frames = ops::vertex_frames(&m).unwrap();
        let field = ops::second_fundamental_form(&m, &frames).unwrap();
        let mut a_min = f64::INFINITY;
        let mut a_max: f64 = 0.0;
        let mut ao_max: f64 = 0.0;
        let mut k_min = f64::INFINITY;
        let mut k_max: f64 = f64::NEG_INFINITY;
        for v in 0..m.num_vertices() {
            a_min = a_min.min(field.norm_a_sq()[v]);
            a_max = a_max.max(field.norm_a_sq()[v]);
            ao_max = ao_max.max(field.norm_ao_sq()[v]);
            k_min = k_min.min(field.gauss()[v]);
            k_max = k_max.max(field.gauss()[v]);
        }
        let kd = ops::gauss_curvature_angle_defect(&m);
        let gb: f64 = kd.iter().zip(ops_cache.mass()).map(|(k, mm)| k * mm).sum();
        let grads = ops::covariant_gradients(&m, &field);
        let e_h2 = ops_cache.integrate(field.norm_h_sq());
        let e_ao2 = ops_cache.integrate(field.norm_ao_sq());
        println!(
            "L{level}: V={} area_err={:.2e} Hmax_err={:.3} |A|2 in [{:.4},{:.4}] |Ao|2max={:.2e} K in [{:.4},{:.4}] GB={:.3e} intgradH2={:.3e} intgradA2/intgradAo2={:.3} eH2={:.4} (16pi={:.4}) eAo2={:.4}",
            rep.num_vertices,
            (area - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI),
            hmax,
            a_min, a_max, ao_max, k_min, k_max,
            (gb - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI),
            grads.int_grad_h_sq,
            grads.int_grad_a_sq / grads.int_grad_ao_sq.max(1e-300),
            e_h2, 16.0 * std::f64::consts::PI, e_ao2
        );
    }
    // torus checks
    let t = torus(2.0, 1.0, 64, 32, TorusEmbedding::R3).unwrap();
    let rep = t.validate().unwrap();
    let oc = ops::build_operators(&t).unwrap();
    println!("torus: chi={} area={:.4} (8pi^2={:.4})", rep.euler_characteristic, oc.total_area(), 8.0 * std::f64::consts::PI * std::f64::consts::PI);
    let h = ops::mean_curvature_vector(&t, &oc);
    // outer equator: vertices with max xy-radius
    let mut best = (0usize, 0.0f64);
    for v in 0..t.num_vertices() {
        let p = t.position(v);
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if r > best.1 { best = (v, r); }
    }
    let hv = &h[best.0 * 3..best.0 * 3 + 3];
    let hn = (hv[0] * hv[0] + hv[1] * hv[1] + hv[2] * hv[2]).sqrt();
    println!("torus outer equator |H|={:.4} (expect 4/3={:.4})", hn, 4.0/3.0);
    let field = ops::curvature_field(&t).unwrap();
    let e_h2 = oc.integrate(field.norm_h_sq());
    let e_ao2 = oc.integrate(field.norm_ao_sq());
    println!("torus intH2={:.3} (exact 16pi^2/sqrt3={:.3}) intAo2={:.3} (exact 8pi^2/sqrt3={:.3})",
        e_h2, 16.0 * std::f64::consts::PI.powi(2) / 3.0f64.sqrt(),
        e_ao2, 8.0 * std::f64::consts::PI.powi(2) / 3.0f64.sqrt());
    // clifford
    let c = torus(2.0, 1.0, 48, 48, TorusEmbedding::CliffordR4).unwrap();
    c.validate().unwrap();
    let fc = ops::curvature_field(&c).unwrap();
    let occ = ops::build_operators(&c).unwrap();
    let kmean: f64 = occ.integrate(fc.gauss()) / occ.total_area();
    println!("clifford(R=2): mean K = {:.4e} (expect 0), |H| at v0 = {:.4} (expect 1.0)", kmean, fc.norm_h_sq()[0].sqrt());
}
