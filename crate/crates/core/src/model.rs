//! Problem data: plate parameters, items, defects and the assembled instance.

use std::collections::BTreeMap;

use thiserror::Error;

/// Lengths are integer millimeters.
pub type Length = i64;
/// Areas are integer square millimeters.
pub type Area = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("item {id} ({width}x{height}) does not fit in a plate in any orientation")]
    ItemTooLarge { id: usize, width: Length, height: Length },
    #[error("item {id} ({width}x{height}) has a side below the minimum waste size")]
    ItemTooSmall { id: usize, width: Length, height: Length },
    #[error("item ids must be 0..N-1 in order, found {found} at position {position}")]
    NonContiguousIds { position: usize, found: usize },
    #[error("duplicate sequence {sequence} in stack {stack}")]
    DuplicateSequence { stack: usize, sequence: usize },
    #[error("defect {id} on plate {plate} lies outside the plate")]
    DefectOutOfPlate { id: usize, plate: usize },
    #[error("defects {a} and {b} overlap on plate {plate}")]
    DefectOverlap { plate: usize, a: usize, b: usize },
}

/// Plate dimensions and cut-distance parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    pub plate_width: Length,
    pub plate_height: Length,
    pub plate_count: usize,
    /// Minimum width of a first-level sub-plate (wastes exempt).
    pub min1: Length,
    /// Maximum width of a first-level sub-plate (wastes exempt).
    pub max1: Length,
    /// Minimum height of a second-level sub-plate (wastes exempt).
    pub min2: Length,
    /// Minimum width and height of any waste piece.
    pub min_waste: Length,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            plate_width: 6000,
            plate_height: 3210,
            plate_count: 100,
            min1: 100,
            max1: 3500,
            min2: 100,
            min_waste: 20,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidParams(m.to_string()));
        if self.plate_width <= 0 || self.plate_height <= 0 {
            return bad("plate dimensions must be positive");
        }
        if self.plate_count == 0 {
            return bad("plate count must be positive");
        }
        if !(0 < self.min1 && self.min1 <= self.max1 && self.max1 <= self.plate_width) {
            return bad("need 0 < min1 <= max1 <= plate width");
        }
        if !(0 < self.min2 && self.min2 <= self.plate_height) {
            return bad("need 0 < min2 <= plate height");
        }
        if !(0 < self.min_waste && self.min_waste <= self.min1.min(self.min2)) {
            return bad("need 0 < min_waste <= min(min1, min2)");
        }
        Ok(())
    }

    pub fn plate_area(&self) -> Area {
        self.plate_width * self.plate_height
    }
}

/// Axis-aligned rectangle, `[x, x + w) x [y, y + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: Length,
    pub y: Length,
    pub w: Length,
    pub h: Length,
}

impl Rect {
    pub const fn new(x: Length, y: Length, w: Length, h: Length) -> Rect {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> Length {
        self.x + self.w
    }

    pub fn top(&self) -> Length {
        self.y + self.h
    }

    pub fn area(&self) -> Area {
        self.w * self.h
    }

    /// True if the open interiors intersect (touching borders do not count).
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.top() && other.y < self.top()
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.top() <= self.top()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Item {
    /// Global 0-based id.
    pub id: usize,
    pub width: Length,
    pub height: Length,
    pub chain_id: usize,
    /// Position inside the chain. Raw `SEQUENCE` after parsing, 0-based after `Instance::new`.
    pub chain_rank: usize,
}

impl Item {
    pub fn area(&self) -> Area {
        self.width * self.height
    }

    /// `(width, height, rotated)` for each distinct orientation.
    pub fn orientations(&self) -> impl Iterator<Item = (Length, Length, bool)> {
        let square = self.width == self.height;
        let w = self.width;
        let h = self.height;
        std::iter::once((w, h, false)).chain((!square).then_some((h, w, true)))
    }

    pub fn same_shape(&self, other: &Item) -> bool {
        (self.width == other.width && self.height == other.height)
            || (self.width == other.height && self.height == other.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Defect {
    pub id: usize,
    pub plate_index: usize,
    pub x: Length,
    pub y: Length,
    pub width: Length,
    pub height: Length,
}

impl Defect {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.width, self.height)
    }
    pub fn right(&self) -> Length {
        self.x + self.width
    }
    pub fn top(&self) -> Length {
        self.y + self.height
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub params: Params,
    pub items: Vec<Item>,
    /// Item ids of each chain in extraction order.
    pub chains: Vec<Vec<usize>>,
    /// Defects indexed by plate.
    pub defects: Vec<Vec<Defect>>,
    item_area: Area,
}

impl Instance {
    /// Builds an instance, compacting chain ids and normalizing ranks to 0-based positions.
    ///
    /// Items must carry ids `0..N` in order; `chain_id` may be any stack label and
    /// `chain_rank` any strictly ordered sequence key within a chain.
    pub fn new(
        name: impl Into<String>,
        params: Params,
        mut items: Vec<Item>,
        defects: Vec<Defect>,
    ) -> Result<Instance, ModelError> {
        params.validate()?;
        for (position, item) in items.iter().enumerate() {
            if item.id != position {
                return Err(ModelError::NonContiguousIds { position, found: item.id });
            }
        }
        let mw = params.min_waste;
        for it in &items {
            if it.width < mw || it.height < mw {
                return Err(ModelError::ItemTooSmall { id: it.id, width: it.width, height: it.height });
            }
            let fits = it.orientations().any(|(w, h, _)| w <= params.plate_width && h <= params.plate_height && w <= params.max1);
            if !fits {
                return Err(ModelError::ItemTooLarge { id: it.id, width: it.width, height: it.height });
            }
        }

        let mut by_stack: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for it in &items {
            by_stack.entry(it.chain_id).or_default().push((it.chain_rank, it.id));
        }
        let mut chains = Vec::with_capacity(by_stack.len());
        for (stack, mut members) in by_stack {
            members.sort_unstable();
            for pair in members.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(ModelError::DuplicateSequence { stack, sequence: pair[0].0 });
                }
            }
            let chain_index = chains.len();
            for (rank, &(_, id)) in members.iter().enumerate() {
                items[id].chain_id = chain_index;
                items[id].chain_rank = rank;
            }
            chains.push(members.into_iter().map(|(_, id)| id).collect::<Vec<_>>());
        }
        if items.len() >= 700 {
            log::warn!("instance has {} items; the DPA* memory estimate assumes fewer than 700", items.len());
        }

        let mut per_plate: Vec<Vec<Defect>> = Vec::new();
        for d in defects {
            let plate = Rect::new(0, 0, params.plate_width, params.plate_height);
            if d.width <= 0 || d.height <= 0 || !plate.contains(&d.rect()) {
                return Err(ModelError::DefectOutOfPlate { id: d.id, plate: d.plate_index });
            }
            if per_plate.len() <= d.plate_index {
                per_plate.resize(d.plate_index + 1, Vec::new());
            }
            per_plate[d.plate_index].push(d);
        }
        for (plate, ds) in per_plate.iter_mut().enumerate() {
            ds.sort_by_key(|d| (d.x, d.y, d.id));
            for i in 0..ds.len() {
                for j in i + 1..ds.len() {
                    if ds[i].rect().overlaps(&ds[j].rect()) {
                        return Err(ModelError::DefectOverlap { plate, a: ds[i].id, b: ds[j].id });
                    }
                }
            }
        }

        let item_area = items.iter().map(Item::area).sum();
        Ok(Instance { name: name.into(), params, items, chains, defects: per_plate, item_area })
    }

    pub fn defects(&self, plate: usize) -> &[Defect] {
        self.defects.get(plate).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    pub fn total_item_area(&self) -> Area {
        self.item_area
    }

    /// True when `id` is the last item of its chain.
    pub fn is_chain_tail(&self, id: usize) -> bool {
        let it = &self.items[id];
        it.chain_rank + 1 == self.chains[it.chain_id].len()
    }
}
