//! Public classical messages and their line-based text form.
//!
//! Each line is `<seq> <A|B> <KIND> <hex payload>`. Payload bytes by kind:
//!
//! | payload  | bytes                                              |
//! |----------|----------------------------------------------------|
//! | bits     | `u32` BE bit count, then bits packed MSB-first     |
//! | indices  | `u32` BE count, then one `u32` BE per index        |
//! | rate     | IEEE-754 `f64` BE                                  |
//! | count    | `u64` BE                                           |
//! | text     | UTF-8                                              |
//!
//! An empty payload is written as `-`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn tag(self) -> &'static str {
        match self {
            Party::Alice => "A",
            Party::Bob => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    ReceiptAck,
    CheckPositions,
    CheckValues,
    PairingPermutation,
    PairParities,
    TripleGrouping,
    SacrificePositions,
    SacrificeValues,
    ErrorEstimate,
    CodeAnnouncement,
    Abort,
}

impl MessageKind {
    pub const ALL: [MessageKind; 11] = [
        MessageKind::ReceiptAck,
        MessageKind::CheckPositions,
        MessageKind::CheckValues,
        MessageKind::PairingPermutation,
        MessageKind::PairParities,
        MessageKind::TripleGrouping,
        MessageKind::SacrificePositions,
        MessageKind::SacrificeValues,
        MessageKind::ErrorEstimate,
        MessageKind::CodeAnnouncement,
        MessageKind::Abort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::ReceiptAck => "RECEIPT_ACK",
            MessageKind::CheckPositions => "CHECK_POSITIONS",
            MessageKind::CheckValues => "CHECK_VALUES",
            MessageKind::PairingPermutation => "PAIRING_PERMUTATION",
            MessageKind::PairParities => "PAIR_PARITIES",
            MessageKind::TripleGrouping => "TRIPLE_GROUPING",
            MessageKind::SacrificePositions => "SACRIFICE_POSITIONS",
            MessageKind::SacrificeValues => "SACRIFICE_VALUES",
            MessageKind::ErrorEstimate => "ERROR_ESTIMATE",
            MessageKind::CodeAnnouncement => "CODE_ANNOUNCEMENT",
            MessageKind::Abort => "ABORT",
        }
    }

    fn payload_shape(self) -> Shape {
        match self {
            MessageKind::ReceiptAck => Shape::Count,
            MessageKind::CheckPositions
            | MessageKind::PairingPermutation
            | MessageKind::TripleGrouping
            | MessageKind::SacrificePositions => Shape::Indices,
            MessageKind::CheckValues
            | MessageKind::PairParities
            | MessageKind::SacrificeValues
            | MessageKind::CodeAnnouncement => Shape::Bits,
            MessageKind::ErrorEstimate => Shape::Rate,
            MessageKind::Abort => Shape::Text,
        }
    }
}

impl FromStr for MessageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown message kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Bits,
    Indices,
    Rate,
    Count,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Bits(BitVector),
    Indices(Vec<usize>),
    Rate(f64),
    Count(u64),
    Text(String),
}

impl Payload {
    fn shape(&self) -> Shape {
        match self {
            Payload::Bits(_) => Shape::Bits,
            Payload::Indices(_) => Shape::Indices,
            Payload::Rate(_) => Shape::Rate,
            Payload::Count(_) => Shape::Count,
            Payload::Text(_) => Shape::Text,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Payload::Bits(v) => {
                let mut out = (v.len() as u32).to_be_bytes().to_vec();
                out.extend(v.to_bytes());
                out
            }
            Payload::Indices(ix) => {
                let mut out = (ix.len() as u32).to_be_bytes().to_vec();
                for &i in ix {
                    out.extend((i as u32).to_be_bytes());
                }
                out
            }
            Payload::Rate(r) => r.to_be_bytes().to_vec(),
            Payload::Count(c) => c.to_be_bytes().to_vec(),
            Payload::Text(t) => t.as_bytes().to_vec(),
        }
    }

    fn from_bytes(shape: Shape, b: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("malformed payload: {msg}"));
        fn head(b: &[u8]) -> Result<(usize, &[u8])> {
            let (h, rest) = b.split_at_checked(4).ok_or_else(|| {
                Error::InvalidParameter("malformed payload: missing length".into())
            })?;
            Ok((
                u32::from_be_bytes(h.try_into().expect("4 bytes")) as usize,
                rest,
            ))
        }
        Ok(match shape {
            Shape::Bits => {
                let (len, rest) = head(b)?;
                Payload::Bits(BitVector::from_bytes(rest, len)?)
            }
            Shape::Indices => {
                let (count, rest) = head(b)?;
                if rest.len() != 4 * count {
                    return Err(bad("index count does not match body"));
                }
                Payload::Indices(
                    rest.chunks_exact(4)
                        .map(|c| u32::from_be_bytes(c.try_into().expect("4 bytes")) as usize)
                        .collect(),
                )
            }
            Shape::Rate => Payload::Rate(f64::from_be_bytes(
                b.try_into().map_err(|_| bad("rate needs 8 bytes"))?,
            )),
            Shape::Count => Payload::Count(u64::from_be_bytes(
                b.try_into().map_err(|_| bad("count needs 8 bytes"))?,
            )),
            Shape::Text => {
                Payload::Text(String::from_utf8(b.to_vec()).map_err(|_| bad("text is not UTF-8"))?)
            }
        })
    }
}

/// A public message. The sequence number is assigned by the [`Transcript`].
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: Party,
    pub kind: MessageKind,
    pub payload: Payload,
}

impl Message {
    pub fn new(sender: Party, kind: MessageKind, payload: Payload) -> Self {
        debug_assert_eq!(kind.payload_shape(), payload.shape(), "{kind:?} payload");
        Self {
            sender,
            kind,
            payload,
        }
    }
}

/// Ordered log of everything said on the public channel.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, msg: Message) {
        self.messages.push(msg);
    }

    pub fn send(&mut self, sender: Party, kind: MessageKind, payload: Payload) {
        self.push(Message::new(sender, kind, payload));
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn last(&self) -> Option<&Message> {
        self.messages.last()
    }

    pub fn kinds(&self) -> impl Iterator<Item = MessageKind> + '_ {
        self.messages.iter().map(|m| m.kind)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Self::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split(' ').collect();
            let [seq, sender, kind, payload] = fields[..] else {
                return Err(err(format!("expected 4 fields, got {}", fields.len())));
            };
            if seq.parse::<usize>().ok() != Some(t.len()) {
                return Err(err(format!("sequence number {seq} out of order")));
            }
            let sender = match sender {
                "A" => Party::Alice,
                "B" => Party::Bob,
                other => return Err(err(format!("unknown sender {other:?}"))),
            };
            let kind: MessageKind = kind.parse().map_err(|e: Error| err(e.to_string()))?;
            let bytes = if payload == "-" {
                Vec::new()
            } else {
                decode_hex(payload).ok_or_else(|| err("payload is not hex".into()))?
            };
            let payload = Payload::from_bytes(kind.payload_shape(), &bytes)
                .map_err(|e| err(e.to_string()))?;
            t.push(Message {
                sender,
                kind,
                payload,
            });
        }
        Ok(t)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (seq, m) in self.messages.iter().enumerate() {
            let bytes = m.payload.to_bytes();
            let hex = if bytes.is_empty() {
                "-".to_string()
            } else {
                encode_hex(&bytes)
            };
            writeln!(f, "{seq} {} {} {hex}", m.sender.tag(), m.kind.name())?;
        }
        Ok(())
    }
}

fn encode_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn decode_hex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok())
        .collect()
}
