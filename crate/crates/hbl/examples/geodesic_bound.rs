//! Exponential bound on derivatives along geodesics of metrics.
//!
//! Along the geodesic H(t) = H^{1/2} e^{ts} H^{1/2} the relative
//! endomorphism h(t) = H^{-1} H(t) satisfies the pointwise estimate
//!
//!   |dbar(h^{-1} del_H h)|_H + |h^{-1} del_H h|_H
//!     <= (|dbar del_H s|_H + |del_H s|_H) (e^{4tx} - 1) / (4x),
//!
//! with x = |s|_H + |dbar s|_H. This example samples the two sides along a
//! random geodesic and prints the worst ratio at each time.

use hbl::bundle::{
    chern_del, connection_form, geodesic, log_map, pointwise_h_norm_sq, Metric,
};
use hbl::geometry::background::Background;
use hbl::geometry::calculus::dbar;
use hbl::geometry::form::EndForm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hbl::Result<()> {
    let bg = Background::new(2, 8, 2, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let h = Metric::random(&bg, &mut rng, 2, 0.15)?;
    let k = Metric::random(&bg, &mut rng, 2, 0.15)?;

    let s = log_map(&h, &k)?;
    let s_form = EndForm::from_field(bg.n, s);
    let theta = connection_form(&bg, &h);
    let del_s = chern_del(&bg, &theta, &s_form);
    let dbar_s = dbar(&bg, &s_form);
    let dbar_del_s = dbar(&bg, &del_s);

    let sqrt_re = |f: &hbl::geometry::grid::GridField| -> Vec<f64> {
        f.data.iter().map(|z| z.re.max(0.0).sqrt()).collect()
    };
    let ns = sqrt_re(&pointwise_h_norm_sq(&bg, &s_form, &h));
    let nds = sqrt_re(&pointwise_h_norm_sq(&bg, &dbar_s, &h));
    let amp: Vec<f64> = sqrt_re(&pointwise_h_norm_sq(&bg, &del_s, &h))
        .iter()
        .zip(sqrt_re(&pointwise_h_norm_sq(&bg, &dbar_del_s, &h)))
        .map(|(a, b)| a + b)
        .collect();

    println!("  t     sup lhs       sup rhs       worst lhs/rhs");
    for j in 0..=10 {
        let t = j as f64 / 10.0;
        let mt = geodesic(&h, &k, t)?;
        let ht = h.inv().matmul(&mt.w);
        let ht_form = EndForm::from_field(bg.n, ht);
        let del_ht = chern_del(&bg, &theta, &ht_form);
        let mut a = del_ht;
        let ht_inv = mt.inv().matmul(&h.w);
        for c in a.comps.iter_mut() {
            *c = ht_inv.matmul(c);
        }
        let da = dbar(&bg, &a);
        let lhs: Vec<f64> = sqrt_re(&pointwise_h_norm_sq(&bg, &a, &h))
            .iter()
            .zip(sqrt_re(&pointwise_h_norm_sq(&bg, &da, &h)))
            .map(|(u, v)| u + v)
            .collect();
        let mut sup_l = 0.0_f64;
        let mut sup_r = 0.0_f64;
        let mut worst = 0.0_f64;
        for p in 0..bg.points() {
            let x = ns[p] + nds[p];
            let factor = if x < 1e-14 { t } else { ((4.0 * t * x).exp() - 1.0) / (4.0 * x) };
            let rhs = amp[p] * factor;
            sup_l = sup_l.max(lhs[p]);
            sup_r = sup_r.max(rhs);
            if rhs > 0.0 {
                worst = worst.max(lhs[p] / rhs);
            }
        }
        println!("{t:>5.2}  {sup_l:.6e}  {sup_r:.6e}  {worst:.6}");
    }
    println!("the bound holds when every ratio stays at or below 1");
    Ok(())
}
