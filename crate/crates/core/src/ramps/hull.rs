use super::{RampEvent, RampHull};

/// Keep only the (duration, drop) events on the upper concave envelope.
///
/// First every event dominated by one that is no longer and drops at least as
/// much is removed (equal points keep the first seen). The survivors, sorted
/// by duration with strictly increasing drops, are then reduced to the
/// vertices of their upper convex chain. Collinear middle points are dropped.
pub fn hull_reduce(events: &[RampEvent]) -> RampHull {
    let hour = events.first().map(|e| e.hour);
    let mut sorted: Vec<RampEvent> = events.to_vec();
    sorted.sort_by(|a, b| {
        a.duration
            .total_cmp(&b.duration)
            .then(b.drop.total_cmp(&a.drop))
    });

    let mut front: Vec<RampEvent> = Vec::with_capacity(sorted.len());
    for e in sorted {
        if front.last().is_none_or(|last| e.drop > last.drop) {
            front.push(e);
        }
    }

    let mut chain: Vec<RampEvent> = Vec::with_capacity(front.len());
    for p in front {
        while chain.len() >= 2 {
            let o = chain[chain.len() - 2];
            let a = chain[chain.len() - 1];
            // collinear within rounding counts as not strictly convex
            let scale = (a.duration - o.duration).abs().max((p.duration - o.duration).abs())
                * (a.drop - o.drop).abs().max((p.drop - o.drop).abs());
            if cross(&o, &a, &p) >= -1e-12 * scale {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }

    RampHull {
        hour,
        events: chain,
    }
}

/// Envelope of the union of several hourly envelopes.
pub fn global_hull(hulls: &[RampHull]) -> RampHull {
    let all: Vec<RampEvent> = hulls.iter().flat_map(|h| h.events.iter().copied()).collect();
    let mut hull = hull_reduce(&all);
    hull.hour = None;
    hull
}

/// z-component of (a - o) x (b - o) in the (duration, drop) plane.
fn cross(o: &RampEvent, a: &RampEvent, b: &RampEvent) -> f64 {
    (a.duration - o.duration) * (b.drop - o.drop) - (a.drop - o.drop) * (b.duration - o.duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(duration: f64, drop: f64) -> RampEvent {
        RampEvent {
            hour: 11,
            duration,
            drop,
        }
    }

    fn points(h: &RampHull) -> Vec<(f64, f64)> {
        h.events.iter().map(|e| (e.duration, e.drop)).collect()
    }

    #[test]
    fn dominated_events_are_removed() {
        let h = hull_reduce(&[ev(2.0, 0.3), ev(5.0, 0.2), ev(10.0, 0.6), ev(10.0, 0.4)]);
        assert_eq!(points(&h), vec![(2.0, 0.3), (10.0, 0.6)]);
        assert_eq!(h.hour, Some(11));
    }

    #[test]
    fn reference_hour_is_already_an_envelope() {
        let table = [(2.0, 0.061), (19.0, 0.613), (36.0, 0.778), (48.0, 0.878)];
        let input: Vec<_> = table.iter().map(|&(t, i)| ev(t, i)).collect();
        let h = hull_reduce(&input);
        assert_eq!(points(&h), table.to_vec());
        h.check_invariants().unwrap();
    }

    #[test]
    fn singleton_and_empty() {
        assert_eq!(points(&hull_reduce(&[ev(10.0, 0.5)])), vec![(10.0, 0.5)]);
        let empty = hull_reduce(&[]);
        assert!(empty.is_empty());
        assert_eq!(empty.hour, None);
        assert!(global_hull(&[]).is_empty());
    }

    #[test]
    fn below_chord_points_are_dropped() {
        let h = hull_reduce(&[ev(1.0, 0.1), ev(5.0, 0.2), ev(10.0, 0.5)]);
        assert_eq!(points(&h), vec![(1.0, 0.1), (10.0, 0.5)]);
        // collinear
        let h = hull_reduce(&[ev(1.0, 0.1), ev(2.0, 0.2), ev(3.0, 0.3)]);
        assert_eq!(points(&h), vec![(1.0, 0.1), (3.0, 0.3)]);
    }

    #[test]
    fn global_merges_hours() {
        let a = hull_reduce(&[ev(2.0, 0.3)]);
        let b = hull_reduce(&[RampEvent {
            hour: 12,
            duration: 2.0,
            drop: 0.5,
        }]);
        let g = global_hull(&[a.clone(), b]);
        assert_eq!(points(&g), vec![(2.0, 0.5)]);
        assert_eq!(g.events[0].hour, 12);
        assert_eq!(g.hour, None);
        assert_eq!(points(&global_hull(&[a.clone(), a.clone()])), points(&a));
    }

    fn events() -> impl Strategy<Value = Vec<RampEvent>> {
        prop::collection::vec((1u32..120, 1u32..1000), 1..40).prop_map(|v| {
            v.into_iter()
                .map(|(t, i)| ev(t as f64, i as f64 / 1000.0))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(evs in events()) {
            let once = hull_reduce(&evs);
            let twice = hull_reduce(&once.events);
            prop_assert_eq!(points(&once), points(&twice));
            prop_assert!(once.check_invariants().is_ok());
        }

        #[test]
        fn global_of_single_hull_is_identity(evs in events()) {
            let h = hull_reduce(&evs);
            prop_assert_eq!(points(&global_hull(std::slice::from_ref(&h))), points(&h));
        }

        #[test]
        fn global_equals_reduce_of_union(a in events(), b in events()) {
            let union: Vec<RampEvent> = a.iter().chain(b.iter()).copied().collect();
            let g = global_hull(&[hull_reduce(&a), hull_reduce(&b)]);
            prop_assert_eq!(points(&g), points(&hull_reduce(&union)));
        }
    }
}
