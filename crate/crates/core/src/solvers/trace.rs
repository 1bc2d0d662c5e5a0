use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::setfn::Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Select,
    Extract,
    FallbackSingleton,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Select => "select",
            TraceKind::Extract => "extract",
            TraceKind::FallbackSingleton => "fallback_singleton",
        }
    }
}

/// One search step. Serializes as
/// `{"t", "loop", "selected": [1-based elements] | null, "W", "event"}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub t: usize,
    pub loop_id: u8,
    pub selected: Option<Subset>,
    pub worth: f64,
    pub kind: TraceKind,
}

impl Serialize for TraceEvent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("t", &self.t)?;
        map.serialize_entry("loop", &self.loop_id)?;
        map.serialize_entry("selected", &self.selected.map(Subset::to_one_based))?;
        map.serialize_entry("W", &self.worth)?;
        map.serialize_entry("event", self.kind.as_str())?;
        map.end()
    }
}
