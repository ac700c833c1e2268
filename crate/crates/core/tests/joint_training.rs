//! Optional joint two-user training: each user owns its transmitter and
//! receiver and gradients flow through both links.

use aeic::autoencoder::{evaluate_link, train_joint, AeConfig, EvalPlan, Link};
use aeic::rng::SimRng;

#[test]
fn joint_users_reach_low_ser_under_weak_interference() {
    let cfg = AeConfig {
        train_alpha: Some(0.2),
        ..AeConfig::default()
    };
    let users = train_joint(&cfg, &mut SimRng::stream(42, "joint")).unwrap();
    assert_eq!(users.len(), 2);
    let plan = EvalPlan {
        m_users: 2,
        alpha: Some(0.2),
        ebn0_grid: vec![7.0],
        symbols_per_point: 200_000,
        seed: 1,
    };
    for (me, other) in [(0, 1), (1, 0)] {
        let model = &users[me].model;
        let link = Link::with_partners(model, &[&users[other].model]).unwrap();
        let p = &evaluate_link(&link, 4, 4, model.receiver(), &plan).unwrap()[0];
        assert!(p.ser < 5e-3, "user {me}: SER {}", p.ser);
        let losses = &users[me].epoch_losses;
        assert!(losses.last().unwrap() < losses.first().unwrap());
    }
}
