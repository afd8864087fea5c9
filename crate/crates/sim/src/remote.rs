//! HTTP backend for the imagine and describe stages.
//!
//! Imagine sends the view and the top label to `/v1/imagine` and projects the
//! returned picture through the local perceiver. Describe sends that picture
//! to `/v1/caption` and tokenizes the returned text. Any transport failure,
//! non-2xx status or malformed body becomes [`Error::BackendUnavailable`].

use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use tangram_core::pipeline::{project_view, Builtin, DescribeStage, GrayImage, ImagineStage, Message, Representation};
use tangram_core::raster::RasterView;
use tangram_core::{Error, Result};

use crate::formats::image;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagineRequest {
    pub prompt: String,
    pub init_image_png_b64: String,
    pub strength: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagineResponse {
    pub image_png_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionRequest {
    pub image_png_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub backend: String,
}

#[derive(Debug, Deserialize)]
struct ErrorBody {
    error: String,
}

fn unavailable(detail: impl std::fmt::Display) -> Error {
    Error::BackendUnavailable(detail.to_string())
}

/// Plain HTTP client for the wire protocol.
#[derive(Debug, Clone)]
pub struct Client {
    agent: ureq::Agent,
    endpoint: String,
}

impl Client {
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build();
        Client { agent: config.into(), endpoint: endpoint.trim_end_matches('/').to_string() }
    }

    fn finish<T: serde::de::DeserializeOwned>(resp: ureq::http::Response<ureq::Body>) -> Result<T> {
        let status = resp.status().as_u16();
        let body = resp.into_body().read_to_string().map_err(|e| unavailable(format!("status {status}: {e}")))?;
        if !(200..300).contains(&status) {
            let reason = serde_json::from_str::<ErrorBody>(&body).map(|b| b.error).unwrap_or(body);
            return Err(unavailable(format!("status {status}: {reason}")));
        }
        serde_json::from_str(&body).map_err(|e| unavailable(format!("status {status}: malformed response: {e}")))
    }

    fn post<B: Serialize, T: serde::de::DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let url = format!("{}{path}", self.endpoint);
        let resp = self.agent.post(&url).send_json(body).map_err(|e| unavailable(format!("{url}: {e}")))?;
        Self::finish(resp)
    }

    pub fn health(&self) -> Result<Health> {
        let url = format!("{}/v1/health", self.endpoint);
        let resp = self.agent.get(&url).call().map_err(|e| unavailable(format!("{url}: {e}")))?;
        Self::finish(resp)
    }

    pub fn imagine(&self, req: &ImagineRequest) -> Result<ImagineResponse> {
        self.post("/v1/imagine", req)
    }

    pub fn caption(&self, req: &CaptionRequest) -> Result<CaptionResponse> {
        self.post("/v1/caption", req)
    }
}

/// Lowercased words of a caption, punctuation stripped, at most `m` of them.
/// Words outside the vocabulary are kept; the receiver skips them.
pub fn tokenize(text: &str, m: usize) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .take(m)
        .collect()
}

fn decode_image(b64: &str) -> Result<GrayImage> {
    let bytes = B64.decode(b64).map_err(|e| unavailable(format!("malformed response: {e}")))?;
    image::decode(&bytes).map_err(|e| unavailable(format!("malformed response: {e}")))
}

/// Remote imagine and describe; `local` supplies the perceiver and projection
/// used to place returned pictures in the shared space.
#[derive(Debug, Clone)]
pub struct Remote {
    pub client: Client,
    pub local: Builtin,
    pub strength: f64,
    pub message_len: usize,
}

impl ImagineStage for Remote {
    fn imagine(&self, top_label: &str, view: &RasterView, seed: u64) -> Result<Representation> {
        let req = ImagineRequest {
            prompt: top_label.to_string(),
            init_image_png_b64: B64.encode(image::encode_raster(view)),
            strength: self.strength,
            seed,
        };
        let picture = decode_image(&self.client.imagine(&req)?.image_png_b64)?;
        let raster = image::to_raster(&picture, view.width, view.height);
        let b = &self.local;
        let projected = project_view(&b.params, &b.projection, b.settings.feature_source, &raster)?
            .ok_or(Error::DegenerateImagination)?;
        let mut r = Representation::from_vector(&projected).ok_or(Error::DegenerateImagination)?;
        r.imagery = Some(picture);
        Ok(r)
    }
}

impl DescribeStage for Remote {
    fn describe(&self, r: &Representation, _seed: u64) -> Result<Message> {
        let picture = r
            .imagery
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("remote describe needs a picture from remote imagine".into()))?;
        let req = CaptionRequest { image_png_b64: B64.encode(image::encode_gray(picture)) };
        let text = self.client.caption(&req)?.text;
        Message::new(tokenize(&text, self.message_len)).map_err(|_| unavailable(format!("caption {text:?} has no words")))
    }
}
