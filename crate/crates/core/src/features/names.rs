use core::fmt;

pub const FEATURE_COUNT: usize = 39;

/// Trip feature identifiers; the discriminant is the canonical column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(usize)]
pub enum Feature {
    Len,
    Wid,
    Dft,
    SogMean,
    SogMed,
    SogStd,
    SogIqr,
    SogMad,
    SogMax,
    SogMin,
    SogRange,
    SogCv,
    SogPctLow,
    SogPctHigh,
    SogPctOpt,
    SogEnt,
    AccPosMean,
    AccNegMean,
    AccStd,
    AccMin,
    AccZc,
    CogStd,
    CogEnt,
    TrnStd,
    CogTotalChange,
    CogHdgDiffMean,
    CogHdgDiffStd,
    DurHrs,
    DistKm,
    DistHaversineKm,
    SinoIdx,
    Area,
    DltRatio,
    DurSogcv,
    SogLen,
    SogstdDft,
    SogWid,
    SogMeanSq,
    DftSq,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::Len,
        Feature::Wid,
        Feature::Dft,
        Feature::SogMean,
        Feature::SogMed,
        Feature::SogStd,
        Feature::SogIqr,
        Feature::SogMad,
        Feature::SogMax,
        Feature::SogMin,
        Feature::SogRange,
        Feature::SogCv,
        Feature::SogPctLow,
        Feature::SogPctHigh,
        Feature::SogPctOpt,
        Feature::SogEnt,
        Feature::AccPosMean,
        Feature::AccNegMean,
        Feature::AccStd,
        Feature::AccMin,
        Feature::AccZc,
        Feature::CogStd,
        Feature::CogEnt,
        Feature::TrnStd,
        Feature::CogTotalChange,
        Feature::CogHdgDiffMean,
        Feature::CogHdgDiffStd,
        Feature::DurHrs,
        Feature::DistKm,
        Feature::DistHaversineKm,
        Feature::SinoIdx,
        Feature::Area,
        Feature::DltRatio,
        Feature::DurSogcv,
        Feature::SogLen,
        Feature::SogstdDft,
        Feature::SogWid,
        Feature::SogMeanSq,
        Feature::DftSq,
    ];

    /// Column name used in every exported file.
    pub const fn name(self) -> &'static str {
        match self {
            Feature::Len => "LEN",
            Feature::Wid => "WID",
            Feature::Dft => "DFT",
            Feature::SogMean => "SOG_MEAN",
            Feature::SogMed => "SOG_MED",
            Feature::SogStd => "SOG_STD",
            Feature::SogIqr => "SOG_IQR",
            Feature::SogMad => "SOG_MAD",
            Feature::SogMax => "SOG_MAX",
            Feature::SogMin => "SOG_MIN",
            Feature::SogRange => "SOG_RANGE",
            Feature::SogCv => "SOG_CV",
            Feature::SogPctLow => "SOG_PCT_LOW",
            Feature::SogPctHigh => "SOG_PCT_HIGH",
            Feature::SogPctOpt => "SOG_PCT_OPT",
            Feature::SogEnt => "SOG_ENT",
            Feature::AccPosMean => "ACC_POS_MEAN",
            Feature::AccNegMean => "ACC_NEG_MEAN",
            Feature::AccStd => "ACC_STD",
            Feature::AccMin => "ACC_MIN",
            Feature::AccZc => "ACC_ZC",
            Feature::CogStd => "COG_STD",
            Feature::CogEnt => "COG_ENT",
            Feature::TrnStd => "TRN_STD",
            Feature::CogTotalChange => "COG_TOTAL_CHANGE",
            Feature::CogHdgDiffMean => "COG_HDG_DIFF_MEAN",
            Feature::CogHdgDiffStd => "COG_HDG_DIFF_STD",
            Feature::DurHrs => "DUR_HRS",
            Feature::DistKm => "DIST_KM",
            Feature::DistHaversineKm => "DIST_HAVERSINE_KM",
            Feature::SinoIdx => "SINO_IDX",
            Feature::Area => "AREA",
            Feature::DltRatio => "DLT_RATIO",
            Feature::DurSogcv => "DUR_SOGCV",
            Feature::SogLen => "SOG_LEN",
            Feature::SogstdDft => "SOGSTD_DFT",
            Feature::SogWid => "SOG_WID",
            Feature::SogMeanSq => "SOG_MEAN_SQ",
            Feature::DftSq => "DFT_SQ",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
