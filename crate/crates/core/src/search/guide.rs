//! Exact node-ordering keys.

use std::cmp::Ordering;

use crate::node::{GuideKind, Node};

/// A non-negative ratio compared by cross-multiplication.
#[derive(Debug, Clone, Copy)]
pub struct GuideValue {
    pub num: i128,
    pub den: i128,
}

impl GuideValue {
    pub const ZERO: GuideValue = GuideValue { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> GuideValue {
        debug_assert!(den > 0);
        GuideValue { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for GuideValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for GuideValue {}

impl PartialOrd for GuideValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GuideValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

pub fn guide_value(node: &Node, kind: GuideKind) -> GuideValue {
    let waste = node.waste() as i128;
    let area = node.area() as i128;
    match kind {
        GuideKind::Waste => GuideValue::new(waste, 1),
        GuideKind::WastePercentage if area == 0 => GuideValue::ZERO,
        GuideKind::WastePercentage => GuideValue::new(waste, area),
        GuideKind::WastePercentageOverMeanItemArea if node.items_packed == 0 || area == 0 => GuideValue::ZERO,
        GuideKind::WastePercentageOverMeanItemArea => {
            GuideValue::new(waste * node.items_packed as i128, area * node.item_area as i128)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_ordering() {
        assert_eq!(GuideValue::new(1, 4), GuideValue::new(500, 2000));
        assert!(GuideValue::new(1, 3) > GuideValue::new(1, 4));
        assert!(GuideValue::ZERO < GuideValue::new(1, 1_000_000_000_000));
    }

    #[test]
    fn guide_arithmetic() {
        // waste 500, area 2000, two items of total area 1 000 000 (values only, not geometry)
        let p = GuideValue::new(500, 2000);
        assert_eq!(p.to_f64(), 0.25);
        let a = GuideValue::new(500 * 2, 2000 * 1_000_000);
        assert_eq!(a, GuideValue::new(1, 4 * 500_000));
    }
}
