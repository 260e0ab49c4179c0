//! Modules, their in-module components and the nets connecting them.

use std::collections::BTreeMap;

use crate::geom::ModuleId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Macro,
    /// Pre-clustered standard cells, placed exactly like a macro.
    Cluster,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Macro => "macro",
            ComponentKind::Cluster => "cluster",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "macro" => Some(ComponentKind::Macro),
            "cluster" => Some(ComponentKind::Cluster),
            _ => None,
        }
    }
}

/// A rectangle that must be placed inside its module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Component {
    pub w: usize,
    pub h: usize,
    pub kind: ComponentKind,
}

impl Component {
    pub fn new(w: usize, h: usize, kind: ComponentKind) -> Self {
        Self { w, h, kind }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSpec {
    pub name: String,
    /// Area budget in grid cells.
    pub area: u64,
    pub components: Vec<Component>,
}

impl ModuleSpec {
    pub fn component_area(&self) -> u64 {
        self.components.iter().map(|c| c.area() as u64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Net {
    /// Member modules, sorted and deduplicated.
    pub modules: Vec<ModuleId>,
    /// Names of member terminals (I/O ports).
    pub terminals: Vec<String>,
    /// Terminal positions in grid units, when known. They widen the net
    /// bounding box but never count as feedthrough modules.
    pub fixed_points: Vec<(f64, f64)>,
}

impl Net {
    pub fn from_modules(ids: impl IntoIterator<Item = ModuleId>) -> Self {
        let mut modules: Vec<ModuleId> = ids.into_iter().collect();
        modules.sort_unstable();
        modules.dedup();
        Self {
            modules,
            ..Self::default()
        }
    }

    pub fn contains(&self, id: ModuleId) -> bool {
        self.modules.binary_search(&id).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    pub modules: Vec<ModuleSpec>,
    pub nets: Vec<Net>,
}

impl Netlist {
    pub fn module_ids(&self) -> impl Iterator<Item = ModuleId> {
        (0..self.modules.len() as u32).map(ModuleId)
    }

    pub fn module(&self, id: ModuleId) -> &ModuleSpec {
        &self.modules[id.index()]
    }

    pub fn find(&self, name: &str) -> Option<ModuleId> {
        self.modules
            .iter()
            .position(|m| m.name == name)
            .map(|i| ModuleId(i as u32))
    }

    /// Net indices touching each module.
    pub fn nets_by_module(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.modules.len()];
        for (n, net) in self.nets.iter().enumerate() {
            for m in &net.modules {
                out[m.index()].push(n);
            }
        }
        out
    }

    /// Pin demand per unordered module pair: the number of nets that contain
    /// both modules. Keys are `(low, high)`.
    pub fn pair_demands(&self) -> BTreeMap<(ModuleId, ModuleId), u32> {
        let mut demands = BTreeMap::new();
        for net in &self.nets {
            for (i, &a) in net.modules.iter().enumerate() {
                for &b in &net.modules[i + 1..] {
                    *demands.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
        demands
    }

    pub fn total_component_area(&self) -> u64 {
        self.modules.iter().map(ModuleSpec::component_area).sum()
    }
}
