//! Structure of the multipole-space generators against closed-form couplings.

use anticoherent::multipole::{lm_count, lm_index, multipole_generator, GeneratorKind};
use anticoherent::spin::Spin;

#[test]
fn rotation_couples_neighbouring_m_within_each_l() {
    for two_j in 1..=8 {
        let s = Spin::from_two_j(two_j).unwrap();
        let g = multipole_generator(s, GeneratorKind::Rotation);
        let l_max = two_j;
        assert_eq!(g.nrows(), lm_count(l_max));
        for l in 0..=l_max {
            let li = l as i32;
            for m in -li..=li {
                for (l2, m2) in
                    (0..=l_max).flat_map(|l2| (-(l2 as i32)..=l2 as i32).map(move |m2| (l2, m2)))
                {
                    let entry = g[(lm_index(l2, m2), lm_index(l, m))].norm();
                    let want = if l2 == l && (m2 - m).abs() == 1 {
                        let (lf, mf) = (l as f64, m as f64);
                        (lf * (lf + 1.0) - mf * (m2 as f64)).max(0.0).sqrt() / 2.0
                    } else {
                        0.0
                    };
                    assert!(
                        (entry - want).abs() < 1e-12,
                        "j = {two_j}/2: ({l2},{m2}) <- ({l},{m}): {entry} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn squeezing_keeps_m_and_changes_l_by_one() {
    for two_j in 2..=8 {
        let s = Spin::from_two_j(two_j).unwrap();
        let g = multipole_generator(s, GeneratorKind::Squeezing);
        for l in 0..=two_j {
            for m in -(l as i32)..=l as i32 {
                for l2 in 0..=two_j {
                    for m2 in -(l2 as i32)..=l2 as i32 {
                        let entry = g[(lm_index(l2, m2), lm_index(l, m))].norm();
                        if m2 != m || l2.abs_diff(l) != 1 {
                            assert!(entry < 1e-12, "({l2},{m2}) <- ({l},{m}) = {entry}");
                        }
                    }
                }
            }
        }
        // The monopole never moves under Jz².
        let i00 = lm_index(0, 0);
        assert!((0..g.nrows()).all(|r| g[(r, i00)].norm() < 1e-12));
    }
}
