use multisle::loewner::*;
use multisle::montecarlo::*;
use multisle::partition::*;

fn main() {
    // positive: ZI over ZI+ZII at kappa=6
    let mut params = SleParameters::new(6.0, vec![0.0, 0.5, 1.0], PartitionKind::FourPoint { p_i: 1.0, p_ii: 1.0 });
    params.dt_base = 2e-4;
    params.capacity_cap = 30.0;
    let plan = EstimationPlan::new(params.clone(), 400, 31);
    let blocks = FourPointBlocks::new(6.0).unwrap();
    let zi = PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 0.0 }, 6.0, 3).unwrap();
    let cks = [0.5, 1.0, 2.0, 4.0, 8.0];
    let d = martingale_diagnostic(&plan, |x: &[f64]| zi.value(x), &cks).unwrap();
    println!("positive: init={:.4} means={:?}", d.initial, d.means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>());
    println!("stderrs={:?} max_sigma={:.2}", d.std_errs.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(), d.max_sigma_excursion());
    let _ = blocks;

    // negative: numerator = Zc^2 with plan Z = Zc = 2 ZI + ZII
    let mut params2 = params.clone();
    params2.partition = PartitionKind::FourPoint { p_i: 2.0, p_ii: 1.0 };
    let plan2 = EstimationPlan::new(params2, 400, 32);
    let zc = PartitionFunction::new(PartitionKind::FourPoint { p_i: 2.0, p_ii: 1.0 }, 6.0, 3).unwrap();
    let d2 = martingale_diagnostic(&plan2, |x: &[f64]| Ok(zc.value(x)?.powi(2)), &cks).unwrap();
    println!("negative: init={:.4} means={:?}", d2.initial, d2.means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>());
    println!("max_sigma={:.2}", d2.max_sigma_excursion());
}
