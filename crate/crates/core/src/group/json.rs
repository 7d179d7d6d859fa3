use serde::{Deserialize, Serialize};

use super::{Arc, BohrDescription, Character, GridGroup, GroupSet};
use crate::error::{Error, Result};

/// Wire format of a set: `{"dims":[N1,...],"members":[...]}`, members strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetJson {
    pub dims: Vec<usize>,
    pub members: Vec<usize>,
}

impl SetJson {
    pub fn from_set(set: &GroupSet) -> Self {
        SetJson { dims: set.group().dims().to_vec(), members: set.to_vec() }
    }

    pub fn to_set(&self) -> Result<GroupSet> {
        let group = GridGroup::new(&self.dims)?;
        if let Some(w) = self.members.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Malformed(format!("members not strictly increasing at {} -> {}", w[0], w[1])));
        }
        GroupSet::from_indices(&group, self.members.iter().copied())
    }

    pub fn parse(text: &str) -> Result<GroupSet> {
        serde_json::from_str::<SetJson>(text)?.to_set()
    }

    pub fn render(set: &GroupSet) -> String {
        serde_json::to_string(&Self::from_set(set)).expect("set serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcJson {
    pub start: usize,
    pub length: usize,
}

/// Wire format of a Bohr set: `{"freq":[...],"order":L,"arc":{"start":s,"length":l}}`.
/// The ambient group is supplied separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohrJson {
    pub freq: Vec<i64>,
    pub order: usize,
    pub arc: ArcJson,
}

impl BohrJson {
    pub fn from_description(desc: &BohrDescription) -> Self {
        BohrJson {
            freq: desc.character.freq_i64(),
            order: desc.character.order(),
            arc: ArcJson { start: desc.arc.start, length: desc.arc.length },
        }
    }

    pub fn to_description(&self, group: &GridGroup) -> Result<BohrDescription> {
        let character = Character::new(group, &self.freq)?;
        if character.is_zero() && !(self.arc.length == self.order && self.order >= 1) {
            return Err(Error::ZeroCharacter);
        }
        if character.order() != self.order {
            return Err(Error::Malformed(format!(
                "declared order {} but the frequency has order {}",
                self.order,
                character.order()
            )));
        }
        let arc = Arc::new(self.order, self.arc.start, self.arc.length)?;
        BohrDescription::new(character, arc)
    }
}
