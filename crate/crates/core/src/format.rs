//! Instance and bid documents.
//!
//! An instance is a JSON object
//!
//! ```json
//! {"advertisers": [{"name": "A", "value": "2"}, {"name": "E", "value": "2.9"}],
//!  "ads": [["A"], ["E"]]}
//! ```
//!
//! with values as decimal (or `p/q`) strings so nothing is lost to floating
//! point. Position-auction experiments add `"owners"` (one advertiser name per
//! ad) and `"slots"` (click-through rates, strictly decreasing).
//!
//! A bid document is `{"bids": {"A": "1.5", ...}}`. Advertisers left out bid
//! their value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AuctionInstance, BidProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub advertisers: Vec<AdvertiserEntry>,
    pub ads: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owners: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvertiserEntry {
    pub name: String,
    pub value: String,
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn to_instance(&self) -> Result<AuctionInstance> {
        let mut advertisers = Vec::with_capacity(self.advertisers.len());
        for (i, entry) in self.advertisers.iter().enumerate() {
            let value: Scalar = entry
                .value
                .parse()
                .map_err(|e| Error::parse(format!("advertisers[{i}].value"), format!("{e}")))?;
            advertisers.push((entry.name.clone(), value));
        }
        let index_of = |name: &str| self.advertisers.iter().position(|a| a.name == name);
        let mut ads = Vec::with_capacity(self.ads.len());
        for (j, members) in self.ads.iter().enumerate() {
            let mut idx = Vec::with_capacity(members.len());
            for (k, name) in members.iter().enumerate() {
                let i = index_of(name).ok_or_else(|| {
                    Error::parse(format!("ads[{j}][{k}]"), format!("unknown advertiser {name:?}"))
                })?;
                idx.push(i);
            }
            ads.push(idx);
        }
        AuctionInstance::new(advertisers, ads)
    }

    pub fn from_instance(instance: &AuctionInstance) -> Self {
        InstanceDocument {
            advertisers: instance
                .advertisers()
                .map(|i| AdvertiserEntry {
                    name: instance.name(i).to_string(),
                    value: instance.value(i).to_string(),
                })
                .collect(),
            ads: instance
                .ads()
                .iter()
                .map(|ad| ad.members().iter().map(|&i| instance.name(i).to_string()).collect())
                .collect(),
            owners: None,
            slots: None,
        }
    }
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<AuctionInstance> {
    InstanceDocument::from_json(text)?.to_instance()
}

/// Serializes an instance to the document format (pretty-printed JSON).
pub fn serialize_instance(instance: &AuctionInstance) -> String {
    serde_json::to_string_pretty(&InstanceDocument::from_instance(instance)).expect("serializable")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BidDocument {
    bids: serde_json::Map<String, serde_json::Value>,
}

/// Parses a bid document against `instance`. Omitted advertisers bid their
/// value.
pub fn parse_bids(instance: &AuctionInstance, text: &str) -> Result<BidProfile> {
    let doc: BidDocument = serde_json::from_str(text).map_err(json_error)?;
    let mut bids = BidProfile::truthful(instance);
    for (name, raw) in &doc.bids {
        let who = instance
            .advertiser_by_name(name)
            .ok_or_else(|| Error::parse(format!("bids.{name}"), format!("unknown advertiser {name:?}")))?;
        let text = raw
            .as_str()
            .ok_or_else(|| Error::parse(format!("bids.{name}"), "bids must be decimal strings"))?;
        let bid: Scalar = text
            .parse()
            .map_err(|e| Error::parse(format!("bids.{name}"), format!("{e}")))?;
        bids.set(who, bid);
    }
    Ok(bids)
}

pub fn serialize_bids(instance: &AuctionInstance, bids: &BidProfile) -> Result<String> {
    instance.check_dimension(bids)?;
    let mut map = serde_json::Map::new();
    for i in instance.advertisers() {
        map.insert(
            instance.name(i).to_string(),
            serde_json::Value::String(bids.bid(i).to_string()),
        );
    }
    Ok(serde_json::to_string_pretty(&BidDocument { bids: map }).expect("serializable"))
}

/// Parses the compact notation `{(A:2, B:1, C:3), (A:2, B:1), (C:3)}`.
///
/// Advertisers are ordered by first appearance. A name repeated across ads
/// must carry the same value each time.
pub fn parse_shorthand(text: &str) -> Result<AuctionInstance> {
    let body = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| Error::parse("shorthand", "expected {...}"))?;
    let mut advertisers: Vec<(String, Scalar)> = Vec::new();
    let mut ads = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let j = ads.len();
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(format!("ads[{j}]"), "expected '('"))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::parse(format!("ads[{j}]"), "missing ')'"))?;
        let mut members = Vec::new();
        for (k, item) in open[..close].split(',').enumerate() {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (name, value) = item
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("ads[{j}][{k}]"), "expected NAME:VALUE"))?;
            let name = name.trim().to_string();
            let value: Scalar = value
                .parse()
                .map_err(|e| Error::parse(format!("ads[{j}][{k}]"), format!("{e}")))?;
            let idx = match advertisers.iter().position(|(n, _)| *n == name) {
                Some(idx) if advertisers[idx].1 != value => {
                    return Err(Error::parse(
                        format!("ads[{j}][{k}]"),
                        format!("inconsistent value for {name:?}"),
                    ))
                }
                Some(idx) => idx,
                None => {
                    advertisers.push((name, value));
                    advertisers.len() - 1
                }
            };
            members.push(idx);
        }
        ads.push(members);
        rest = open[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    AuctionInstance::new(advertisers, ads)
}
