use super::{ActionCatalog, ActionSet};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Static,
    Random,
}

/// Static proposes nothing; random picks one catalog entry uniformly for
/// every controlled cell.
pub fn baseline_act(kind: BaselineKind, catalog: &ActionCatalog, cells: &[u32], rng: &mut RngStream) -> ActionSet {
    let mut set = ActionSet::noop();
    if kind == BaselineKind::Static || catalog.actions.is_empty() {
        return set;
    }
    for &cell_id in cells {
        let pick = catalog.actions[rng.index(catalog.actions.len())];
        set.push(pick.to_cell_action(cell_id));
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::CatalogAction;

    #[test]
    fn static_is_always_empty() {
        let cat = ActionCatalog::standard(4);
        let mut rng = RngStream::new(1, 6);
        for _ in 0..100 {
            assert!(baseline_act(BaselineKind::Static, &cat, &[1, 2, 3], &mut rng).is_empty());
        }
    }

    #[test]
    fn singleton_catalog_always_chosen() {
        let cat = ActionCatalog { actions: vec![CatalogAction::Power(1.0)] };
        let mut rng = RngStream::new(1, 6);
        let set = baseline_act(BaselineKind::Random, &cat, &[4], &mut rng);
        assert_eq!(set.get(4).unwrap().power_delta_db, Some(1.0));
    }
}
