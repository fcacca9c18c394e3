//! Syntax-element alphabet shared by the codec and the element cipher.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    /// Intra/inter flag of a CU in a non-I frame. Structural, never encrypted.
    PredMode,
    LumaIpmMpmFlag,
    LumaIpmMpmIdx,
    LumaIpmRem,
    ChromaIpm,
    MergeFlag,
    MergeIdx,
    MvdSignH,
    MvdSignV,
    MvdValH,
    MvdValV,
    MvpIdx,
    RefFrmIdx,
    /// Per-TU coded-block flag. Structural, never encrypted.
    CodedBlockFlag,
    LastPos,
    CoefSigFlag,
    CoefGt1,
    CoefGt2,
    CoefSign,
    CoefRemaining,
    DqpSign,
    DqpValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMode {
    Regular,
    Bypass,
    /// Regular prefix bins, bypass suffix bins.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binarization {
    Fl,
    Tr,
    Eg,
}

impl ElementKind {
    pub const ALL: [ElementKind; 22] = [
        ElementKind::PredMode,
        ElementKind::LumaIpmMpmFlag,
        ElementKind::LumaIpmMpmIdx,
        ElementKind::LumaIpmRem,
        ElementKind::ChromaIpm,
        ElementKind::MergeFlag,
        ElementKind::MergeIdx,
        ElementKind::MvdSignH,
        ElementKind::MvdSignV,
        ElementKind::MvdValH,
        ElementKind::MvdValV,
        ElementKind::MvpIdx,
        ElementKind::RefFrmIdx,
        ElementKind::CodedBlockFlag,
        ElementKind::LastPos,
        ElementKind::CoefSigFlag,
        ElementKind::CoefGt1,
        ElementKind::CoefGt2,
        ElementKind::CoefSign,
        ElementKind::CoefRemaining,
        ElementKind::DqpSign,
        ElementKind::DqpValue,
    ];

    /// How the element's bins reach the arithmetic coder in this codec.
    pub fn entropy_mode(self) -> EntropyMode {
        use ElementKind::*;
        match self {
            PredMode | LumaIpmMpmFlag | LumaIpmMpmIdx | ChromaIpm | MergeFlag | MvpIdx
            | CodedBlockFlag | CoefSigFlag | CoefGt1 | CoefGt2 => EntropyMode::Regular,
            // merge index is all-bypass here so its cipher stays length-neutral
            LumaIpmRem | MergeIdx | MvdSignH | MvdSignV | CoefSign | CoefRemaining | DqpSign => {
                EntropyMode::Bypass
            }
            // MVD magnitude: two regular flags, then a bypass EG1 remainder
            MvdValH | MvdValV | RefFrmIdx | LastPos | DqpValue => EntropyMode::Mixed,
        }
    }

    pub fn binarization(self) -> Binarization {
        use ElementKind::*;
        match self {
            LumaIpmMpmIdx | ChromaIpm | CoefRemaining => Binarization::Tr,
            MvdValH | MvdValV | RefFrmIdx | LastPos | DqpValue => Binarization::Eg,
            _ => Binarization::Fl,
        }
    }

    /// Elements no level may touch: they steer parsing structure.
    pub fn is_structural(self) -> bool {
        matches!(
            self,
            ElementKind::PredMode
                | ElementKind::CodedBlockFlag
                | ElementKind::MergeFlag
                | ElementKind::LumaIpmMpmFlag
                | ElementKind::LastPos
                | ElementKind::CoefSigFlag
                | ElementKind::CoefGt1
                | ElementKind::CoefGt2
        )
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One typed value in canonical emission order.
///
/// `param` carries binarization state the value alone does not determine:
/// the Rice parameter for `CoefRemaining`, the reference-window occupancy
/// for `RefFrmIdx`. `DqpValue` carries the signed delta; its sign is coded
/// as a separate `DqpSign` bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntaxElement {
    pub kind: ElementKind,
    pub value: i32,
    pub param: u32,
}

impl SyntaxElement {
    pub fn new(kind: ElementKind, value: i32) -> Self {
        SyntaxElement {
            kind,
            value,
            param: 0,
        }
    }

    pub fn with_param(kind: ElementKind, value: i32, param: u32) -> Self {
        SyntaxElement { kind, value, param }
    }
}
