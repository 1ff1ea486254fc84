use evtensor::{simulate_events, FrameSequence, Polarity};
use proptest::prelude::*;

/// A monotone sequence of frames for one pixel row: every pixel's intensity
/// is scaled by a per-pixel factor at each frame.
fn monotone_sequence(start: f64, steps: &[f64], contrast: f64) -> FrameSequence {
    let mut frames = vec![vec![start]];
    for s in steps {
        let prev = frames.last().unwrap()[0];
        frames.push(vec![prev * s.exp()]);
    }
    let ts = (0..frames.len() as u64).map(|i| i * 1000).collect();
    FrameSequence::new(ts, 1, 1, frames, contrast).unwrap()
}

proptest! {
    #[test]
    fn monotone_count_is_floor_of_change(
        start in 1.0f64..200.0,
        steps in proptest::collection::vec(0.0f64..0.8, 1..6),
        rising in any::<bool>(),
        contrast in 0.05f64..0.6,
    ) {
        let signed: Vec<f64> = steps.iter().map(|s| if rising { *s } else { -*s }).collect();
        let seq = monotone_sequence(start, &signed, contrast);
        let w = simulate_events(&seq);
        let total: f64 = signed.iter().sum::<f64>().abs();
        let expected = (total / contrast).floor() as usize;
        // Allow one event either way only where the change sits on a threshold.
        let ratio = total / contrast;
        if (ratio - ratio.round()).abs() > 1e-6 {
            prop_assert_eq!(w.len(), expected);
        } else {
            prop_assert!(w.len().abs_diff(ratio.round() as usize) <= 1);
        }
        let want = if rising { Polarity::Positive } else { Polarity::Negative };
        prop_assert!(w.events().iter().all(|e| e.p == want));
        prop_assert!(w.events().windows(2).all(|p| p[0].t <= p[1].t));
        prop_assert!(w.events().iter().all(|e| w.contains_time(e.t)));
    }

    #[test]
    fn doubling_contrast_never_adds_events(
        frames in proptest::collection::vec(proptest::collection::vec(1.0f64..255.0, 6), 2..6),
        contrast in 0.05f64..0.5,
    ) {
        let ts: Vec<u64> = (0..frames.len() as u64).map(|i| 100 + i * 777).collect();
        let fine = simulate_events(&FrameSequence::new(ts.clone(), 3, 2, frames.clone(), contrast).unwrap());
        let coarse = simulate_events(&FrameSequence::new(ts, 3, 2, frames, 2.0 * contrast).unwrap());
        for pixel in 0..6u16 {
            let count = |w: &evtensor::EventWindow| {
                w.events().iter().filter(|e| e.y * 3 + e.x == pixel).count()
            };
            prop_assert!(count(&coarse) <= count(&fine));
        }
    }
}

#[test]
fn ramp_fixture_crossing_times() {
    let seq = FrameSequence::new(
        vec![0, 1000],
        1,
        1,
        vec![vec![1.0], vec![std::f64::consts::E]],
        0.25,
    )
    .unwrap();
    let w = simulate_events(&seq);
    let got: Vec<(u64, Polarity)> = w.events().iter().map(|e| (e.t, e.p)).collect();
    let expected: Vec<(u64, Polarity)> = [250, 500, 750, 1000]
        .iter()
        .map(|&t| (t, Polarity::Positive))
        .collect();
    assert_eq!(got, expected);
}
