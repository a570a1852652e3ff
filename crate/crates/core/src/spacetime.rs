//! Discrete 1+1 dimensional Minkowski lattice with light speed one site per step.
//!
//! Lightlike separation counts as causal: two events are spacelike only when
//! `|Δx| > |Δt|`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub x: i64,
    pub t: i64,
}

impl Event {
    pub const fn new(x: i64, t: i64) -> Self {
        Self { x, t }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={}, t={})", self.x, self.t)
    }
}

/// `|Δx| > |Δt|`.
pub fn spacelike(e1: Event, e2: Event) -> bool {
    e1.x.abs_diff(e2.x) > e1.t.abs_diff(e2.t)
}

/// A set of sites over a closed time window `[t_min, t_max]`.
///
/// Serialized as `{ sites = [..], t = [t_min, t_max] }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRegion", into = "RawRegion")]
pub struct Region {
    sites: BTreeSet<i64>,
    t_min: i64,
    t_max: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    sites: Vec<i64>,
    t: [i64; 2],
}

impl TryFrom<RawRegion> for Region {
    type Error = Error;

    fn try_from(raw: RawRegion) -> Result<Self> {
        Region::new(raw.sites, raw.t[0], raw.t[1])
    }
}

impl From<Region> for RawRegion {
    fn from(r: Region) -> Self {
        RawRegion {
            sites: r.sites.into_iter().collect(),
            t: [r.t_min, r.t_max],
        }
    }
}

impl Region {
    pub fn new(sites: impl IntoIterator<Item = i64>, t_min: i64, t_max: i64) -> Result<Self> {
        let sites: BTreeSet<i64> = sites.into_iter().collect();
        if sites.is_empty() {
            return Err(Error::arg("region needs at least one site"));
        }
        if t_min > t_max {
            return Err(Error::arg(format!("region time window [{t_min}, {t_max}] is empty")));
        }
        Ok(Self { sites, t_min, t_max })
    }

    /// The region consisting of one event.
    pub fn event(e: Event) -> Self {
        Self {
            sites: BTreeSet::from([e.x]),
            t_min: e.t,
            t_max: e.t,
        }
    }

    pub fn sites(&self) -> impl ExactSizeIterator<Item = i64> + '_ {
        self.sites.iter().copied()
    }

    pub fn site_set(&self) -> &BTreeSet<i64> {
        &self.sites
    }

    pub fn t_min(&self) -> i64 {
        self.t_min
    }

    pub fn t_max(&self) -> i64 {
        self.t_max
    }

    /// `t_max − t_min`.
    pub fn duration(&self) -> i64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, e: Event) -> bool {
        self.sites.contains(&e.x) && (self.t_min..=self.t_max).contains(&e.t)
    }

    pub fn is_subregion_of(&self, other: &Region) -> bool {
        self.sites.is_subset(&other.sites) && self.t_min >= other.t_min && self.t_max <= other.t_max
    }

    /// Every lattice event of the region, site-major.
    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        self.sites
            .iter()
            .flat_map(move |&x| (self.t_min..=self.t_max).map(move |t| Event::new(x, t)))
    }

    /// Distance from `x` to the nearest site of the region.
    pub fn site_distance(&self, x: i64) -> u64 {
        let after = self.sites.range(x..).next().map(|&s| s.abs_diff(x));
        let before = self.sites.range(..x).next_back().map(|&s| s.abs_diff(x));
        after.into_iter().chain(before).min().expect("region is nonempty")
    }
}

/// Largest `|Δt|` between the two time windows.
fn max_time_gap(r1: &Region, r2: &Region) -> u64 {
    r1.t_max.abs_diff(r2.t_min).max(r2.t_max.abs_diff(r1.t_min))
}

/// `min (|Δx| − |Δt|)` over all event pairs; the regions are spacelike iff it is ≥ 1.
pub fn spacelike_margin(r1: &Region, r2: &Region) -> i64 {
    let gap = max_time_gap(r1, r2) as i64;
    let mut min_dx = i64::MAX;
    for &x in &r1.sites {
        min_dx = min_dx.min(r2.site_distance(x) as i64);
    }
    min_dx - gap
}

/// Every event of `r1` is spacelike to every event of `r2`.
pub fn region_spacelike(r1: &Region, r2: &Region) -> bool {
    spacelike_margin(r1, r2) >= 1
}

/// Events reachable from a region at light speed: `e` belongs iff some `f`
/// in the region has `e.t − f.t ≥ |e.x − f.x|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FutureShadow {
    region: Region,
}

impl FutureShadow {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn contains(&self, e: Event) -> bool {
        let dt = e.t - self.region.t_min;
        dt >= 0 && dt as u64 >= self.region.site_distance(e.x)
    }

    /// First time at which site `x` lies in the shadow.
    pub fn entry_time(&self, x: i64) -> i64 {
        self.region.t_min + self.region.site_distance(x) as i64
    }
}

pub fn future_shadow(r: &Region) -> FutureShadow {
    FutureShadow { region: r.clone() }
}

/// Observer history at a fixed site, strictly increasing in time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Worldline {
    x: i64,
    times: Vec<i64>,
}

impl Worldline {
    pub fn new(events: &[Event]) -> Result<Self> {
        let first = events
            .first()
            .ok_or_else(|| Error::arg("worldline needs at least one event"))?;
        if events.iter().any(|e| e.x != first.x) {
            return Err(Error::arg("worldline events must share one site"));
        }
        if events.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::arg("worldline times must be strictly increasing"));
        }
        Ok(Self {
            x: first.x,
            times: events.iter().map(|e| e.t).collect(),
        })
    }

    /// Every step from `t_start` to `t_end` inclusive at site `x`.
    pub fn span(x: i64, t_start: i64, t_end: i64) -> Result<Self> {
        if t_end < t_start {
            return Err(Error::arg("worldline span is empty"));
        }
        Ok(Self {
            x,
            times: (t_start..=t_end).collect(),
        })
    }

    pub fn x(&self) -> i64 {
        self.x
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        self.times.iter().map(move |&t| Event::new(self.x, t))
    }
}

/// Earliest worldline time inside the future shadow of `r`.
pub fn earliest_contact(worldline: &Worldline, r: &Region) -> Option<i64> {
    let entry = future_shadow(r).entry_time(worldline.x);
    let idx = worldline.times.partition_point(|&t| t < entry);
    worldline.times.get(idx).copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shadow(r: &Region, e: Event) -> bool {
        r.events().any(|f| e.t - f.t >= (e.x - f.x).abs())
    }

    fn brute_region_spacelike(r1: &Region, r2: &Region) -> bool {
        r1.events().all(|a| r2.events().all(|b| spacelike(a, b)))
    }

    #[test]
    fn event_separation() {
        assert!(spacelike(Event::new(0, 0), Event::new(5, 0)));
        assert!(!spacelike(Event::new(0, 0), Event::new(1, 5)));
        assert!(!spacelike(Event::new(0, 0), Event::new(3, 3)));
        assert!(!spacelike(Event::new(2, 7), Event::new(2, 7)));
    }

    #[test]
    fn region_separation() {
        let r = |s: &[i64], a, b| Region::new(s.iter().copied(), a, b).unwrap();
        assert!(region_spacelike(&r(&[0], 0, 0), &r(&[5], 0, 0)));
        assert!(!region_spacelike(&r(&[0, 1], 0, 0), &r(&[1, 2], 0, 0)));
        let (a, b) = (r(&[0], 0, 2), r(&[3], 0, 0));
        assert_eq!(region_spacelike(&a, &b), brute_region_spacelike(&a, &b));
        assert!(region_spacelike(&a, &b));
        assert_eq!(spacelike_margin(&a, &b), 1);
    }

    #[test]
    fn region_separation_matches_enumeration() {
        for s1 in -3..=3 {
            for w1 in 0..3 {
                for s2 in -3..=3 {
                    for t2 in -2..=2 {
                        for w2 in 0..2 {
                            let a = Region::new([s1, s1 + w1], 0, w1).unwrap();
                            let b = Region::new([s2 + 2, s2 + 4], t2, t2 + w2).unwrap();
                            assert_eq!(region_spacelike(&a, &b), brute_region_spacelike(&a, &b));
                            assert_eq!(region_spacelike(&b, &a), region_spacelike(&a, &b));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn shadow_membership() {
        let s = future_shadow(&Region::event(Event::new(0, 0)));
        assert!(s.contains(Event::new(0, 5)));
        assert!(!s.contains(Event::new(6, 5)));
        let r = Region::new([-2, 4], 1, 3).unwrap();
        let s = future_shadow(&r);
        for x in -8..=10 {
            for t in -2..=12 {
                assert_eq!(s.contains(Event::new(x, t)), brute_shadow(&r, Event::new(x, t)));
            }
        }
    }

    #[test]
    fn contact_times() {
        let alice = Worldline::span(0, 0, 2000).unwrap();
        let bob = Region::new([1000], 0, 0).unwrap();
        assert_eq!(earliest_contact(&alice, &bob), Some(1000));
        let here = Region::new([0, 3], 0, 0).unwrap();
        assert_eq!(earliest_contact(&alice, &here), Some(0));
        let short = Worldline::span(0, 0, 999).unwrap();
        assert_eq!(earliest_contact(&short, &bob), None);
        let sparse = Worldline::new(&[Event::new(0, -4), Event::new(0, 990), Event::new(0, 1003)]).unwrap();
        assert_eq!(earliest_contact(&sparse, &bob), Some(1003));
    }

    #[test]
    fn worldline_validation() {
        assert!(Worldline::new(&[]).is_err());
        assert!(Worldline::new(&[Event::new(0, 1), Event::new(0, 1)]).is_err());
        assert!(Worldline::new(&[Event::new(0, 1), Event::new(1, 2)]).is_err());
    }

    #[test]
    fn region_config_format() {
        let r: Region = toml_like(r#"{"sites": [3, 1], "t": [0, 2]}"#);
        assert_eq!(r.sites().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!((r.t_min(), r.t_max()), (0, 2));
        assert!(serde_json::from_str::<Region>(r#"{"sites": [], "t": [0, 2]}"#).is_err());
        assert!(serde_json::from_str::<Region>(r#"{"sites": [1], "t": [3, 2]}"#).is_err());
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"sites":[1,3],"t":[0,2]}"#);
    }

    fn toml_like(s: &str) -> Region {
        serde_json::from_str(s).unwrap()
    }
}
