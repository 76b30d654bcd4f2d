//! Single-file JSON model format with a versioned header.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeaserError};
use crate::teaser::TeaserModel;

pub const FORMAT_NAME: &str = "teaser-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct FileRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a TeaserModel,
}

#[derive(Deserialize)]
struct FileOwned {
    format: String,
    version: u32,
    model: TeaserModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

impl TeaserModel {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(&FileRef {
            format: FORMAT_NAME,
            version: FORMAT_VERSION,
            model: self,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<TeaserModel> {
        let header: Header = serde_json::from_str(text)
            .map_err(|e| TeaserError::Format(format!("unreadable header: {e}")))?;
        if header.format != FORMAT_NAME {
            return Err(TeaserError::Format(format!(
                "expected format '{FORMAT_NAME}', found '{}'",
                header.format
            )));
        }
        if header.version != FORMAT_VERSION {
            return Err(TeaserError::Format(format!(
                "unsupported version {} (this build reads {FORMAT_VERSION})",
                header.version
            )));
        }
        let file: FileOwned = serde_json::from_str(text)?;
        debug_assert_eq!(file.format, FORMAT_NAME);
        debug_assert_eq!(file.version, FORMAT_VERSION);
        file.model.validate()?;
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TeaserModel> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
