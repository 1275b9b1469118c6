//! Closed intervals and finite unions of them.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn contains_interval(&self, other: &Interval, slack: f64) -> bool {
        other.lo >= self.lo - slack && other.hi <= self.hi + slack
    }
}

pub fn distance_to_union(x: f64, set: &[Interval]) -> f64 {
    set.iter().map(|i| i.distance(x)).fold(f64::INFINITY, f64::min)
}

pub fn total_length(set: &[Interval]) -> f64 {
    set.iter().map(Interval::len).sum()
}

/// `sup_{x ∈ a} dist(x, b)` for finite unions of closed intervals.
///
/// The supremum is attained at an endpoint of `a` or at the midpoint of a gap
/// of `b` clipped to `a`.
pub fn directed_hausdorff(a: &[Interval], b: &[Interval]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted_b = b.to_vec();
    sorted_b.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut candidates: Vec<f64> = a.iter().flat_map(|i| [i.lo, i.hi]).collect();
    for w in sorted_b.windows(2) {
        if w[1].lo > w[0].hi {
            let mid = 0.5 * (w[0].hi + w[1].lo);
            for i in a {
                if i.contains(mid) {
                    candidates.push(mid);
                }
            }
        }
    }
    candidates
        .into_iter()
        .map(|x| distance_to_union(x, &sorted_b))
        .fold(0.0, f64::max)
}

pub fn hausdorff(a: &[Interval], b: &[Interval]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
