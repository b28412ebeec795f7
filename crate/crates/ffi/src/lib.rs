//! C ABI over `ismclass`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free`. Every fallible call returns an [`IsmStatus`]; on failure
//! [`ism_last_error`] holds a message for the calling thread. Output pointers
//! are written only on success. Panics are caught and reported as
//! [`IsmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex32;

use ismclass::detect::{detect_bursts, DetectedBurst, DetectorConfig};
use ismclass::eval::{score_detections, train_model, Method, MethodSpec, TrainedModel};
use ismclass::features::{frame_features, load_dataset, FeatureSet, FeatureVector};
use ismclass::signal::{add_awgn, generate};
use ismclass::{BurstTruth, Error, GeneratorConfig, IqRecording, Scenario};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    StatsMismatch = 5,
    Runtime = 6,
    Panic = 7,
}

/// A baseband recording, plus its truth when it was generated.
pub struct IsmRecording {
    rec: IqRecording,
    truth: Option<BurstTruth>,
}

/// Detected bursts in sample order.
pub struct IsmBursts {
    bursts: Vec<DetectedBurst>,
}

/// A trained classifier with its feature scaling.
pub struct IsmModel {
    model: TrainedModel,
}

/// Detector parameters; start from [`ism_detector_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsmDetectorConfig {
    pub alpha: f64,
    pub window_len_rising: usize,
    pub window_len_falling: usize,
    pub gap_delta: usize,
    pub smooth_len: usize,
    pub min_burst_us: f64,
    pub min_gap_us: f64,
}

impl From<&IsmDetectorConfig> for DetectorConfig {
    fn from(c: &IsmDetectorConfig) -> Self {
        DetectorConfig {
            alpha: c.alpha,
            window_len_rising: c.window_len_rising,
            window_len_falling: c.window_len_falling,
            gap_delta: c.gap_delta,
            smooth_len: c.smooth_len,
            min_burst_us: c.min_burst_us,
            min_gap_us: c.min_gap_us,
            ..DetectorConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(IsmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => IsmStatus::Io,
            Error::Json(_) | Error::Csv(_) => IsmStatus::Parse,
            Error::StatsMismatch { .. } => IsmStatus::StatsMismatch,
            _ if e.is_validation() => IsmStatus::InvalidArgument,
            Error::OutOfRange { .. } => IsmStatus::InvalidArgument,
            _ => IsmStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(IsmStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult) -> IsmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            IsmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(IsmStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure(IsmStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(IsmStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version, NUL-terminated and static.
#[no_mangle]
pub extern "C" fn ism_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ism_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ism_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

#[no_mangle]
pub extern "C" fn ism_detector_config_default() -> IsmDetectorConfig {
    let d = DetectorConfig::default();
    IsmDetectorConfig {
        alpha: d.alpha,
        window_len_rising: d.window_len_rising,
        window_len_falling: d.window_len_falling,
        gap_delta: d.gap_delta,
        smooth_len: d.smooth_len,
        min_burst_us: d.min_burst_us,
        min_gap_us: d.min_gap_us,
    }
}

/// Synthesizes `scenario` ("beacon", "wifi", "bluetooth" or "mixed") with
/// default timing.
///
/// # Safety
/// `scenario` must be a NUL-terminated string; `out_rec` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_generate(
    scenario: *const c_char,
    duration_s: f64,
    seed: u64,
    sample_rate_hz: f64,
    out_rec: *mut *mut IsmRecording,
) -> IsmStatus {
    guard(|| {
        let scenario: Scenario = string(scenario, "scenario")?.parse()?;
        let slot = out(out_rec, "out_rec")?;
        let (rec, truth) = generate(
            &GeneratorConfig::new(scenario, duration_s, seed),
            sample_rate_hz,
        )?;
        *slot = boxed(IsmRecording {
            rec,
            truth: Some(truth),
        });
        Ok(())
    })
}

/// Wraps `n_samples` interleaved I/Q float pairs.
///
/// # Safety
/// `iq` must point to `2 * n_samples` floats; `out_rec` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_from_iq(
    iq: *const f32,
    n_samples: usize,
    sample_rate_hz: f64,
    out_rec: *mut *mut IsmRecording,
) -> IsmStatus {
    guard(|| {
        let slot = out(out_rec, "out_rec")?;
        let samples = if n_samples == 0 {
            Vec::new()
        } else {
            let iq = deref(iq, "iq")?;
            std::slice::from_raw_parts(iq, 2 * n_samples)
                .chunks_exact(2)
                .map(|p| Complex32::new(p[0], p[1]))
                .collect()
        };
        let rec = IqRecording::new(samples, sample_rate_hz)?;
        *slot = boxed(IsmRecording { rec, truth: None });
        Ok(())
    })
}

/// Reads `<path>` and its `.meta.json` sidecar, plus `.truth.json` if present.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_rec` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_read(
    path: *const c_char,
    out_rec: *mut *mut IsmRecording,
) -> IsmStatus {
    guard(|| {
        let path = Path::new(string(path, "path")?);
        let slot = out(out_rec, "out_rec")?;
        let rec = ismclass::io::read_iq(path)?;
        let tp = ismclass::io::truth_path(path);
        let truth = if tp.exists() {
            Some(ismclass::io::read_truth(&tp)?)
        } else {
            None
        };
        *slot = boxed(IsmRecording { rec, truth });
        Ok(())
    })
}

/// Writes the samples, the meta sidecar and, when known, the truth sidecar.
///
/// # Safety
/// `rec` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_write(
    rec: *const IsmRecording,
    path: *const c_char,
) -> IsmStatus {
    guard(|| {
        let r = deref(rec, "rec")?;
        let path = Path::new(string(path, "path")?);
        ismclass::io::write_iq(path, &r.rec)?;
        if let Some(t) = &r.truth {
            ismclass::io::write_truth(&ismclass::io::truth_path(path), t)?;
        }
        Ok(())
    })
}

/// # Safety
/// `rec` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_len(
    rec: *const IsmRecording,
    out_len: *mut usize,
) -> IsmStatus {
    guard(|| {
        let r = deref(rec, "rec")?;
        *out(out_len, "out_len")? = r.rec.len();
        Ok(())
    })
}

/// # Safety
/// `rec` must be a live handle; `out_rate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_sample_rate(
    rec: *const IsmRecording,
    out_rate: *mut f64,
) -> IsmStatus {
    guard(|| {
        let r = deref(rec, "rec")?;
        *out(out_rate, "out_rate")? = r.rec.sample_rate_hz();
        Ok(())
    })
}

fn truth_of(r: &IsmRecording) -> FfiResult<&BurstTruth> {
    r.truth
        .as_ref()
        .ok_or_else(|| invalid("recording carries no truth"))
}

/// Number of truth bursts; fails when the recording has no truth.
///
/// # Safety
/// `rec` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_truth_len(
    rec: *const IsmRecording,
    out_len: *mut usize,
) -> IsmStatus {
    guard(|| {
        let t = truth_of(deref(rec, "rec")?)?;
        *out(out_len, "out_len")? = t.len();
        Ok(())
    })
}

/// Truth burst `index` as a half-open sample interval and a label code
/// (0 Wi-Fi, 1 beacon, 2 Bluetooth).
///
/// # Safety
/// `rec` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_truth_get(
    rec: *const IsmRecording,
    index: usize,
    out_start: *mut usize,
    out_end: *mut usize,
    out_label: *mut u8,
) -> IsmStatus {
    guard(|| {
        let t = truth_of(deref(rec, "rec")?)?;
        let b = t.bursts.get(index).ok_or_else(|| {
            invalid(format!(
                "truth index {index} out of range ({} bursts)",
                t.len()
            ))
        })?;
        let (s, e, l) = (
            out(out_start, "out_start")?,
            out(out_end, "out_end")?,
            out(out_label, "out_label")?,
        );
        *s = b.start_sample;
        *e = b.end_sample;
        *l = b.label.code();
        Ok(())
    })
}

/// Copy of `rec` with white Gaussian noise at `snr_db` relative to the mean
/// power of its nonzero samples. Truth is carried over.
///
/// # Safety
/// `rec` must be a live handle; `out_rec` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_add_awgn(
    rec: *const IsmRecording,
    snr_db: f64,
    seed: u64,
    out_rec: *mut *mut IsmRecording,
) -> IsmStatus {
    guard(|| {
        let r = deref(rec, "rec")?;
        let slot = out(out_rec, "out_rec")?;
        let noisy = add_awgn(&r.rec, snr_db, seed)?;
        *slot = boxed(IsmRecording {
            rec: noisy,
            truth: r.truth.clone(),
        });
        Ok(())
    })
}

/// # Safety
/// `rec` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ism_recording_free(rec: *mut IsmRecording) {
    free(rec);
}

/// Runs the detector; `config` NULL selects the defaults.
///
/// # Safety
/// `rec` must be a live handle; `config` NULL or valid; `out_bursts` writable.
#[no_mangle]
pub unsafe extern "C" fn ism_detect(
    rec: *const IsmRecording,
    config: *const IsmDetectorConfig,
    out_bursts: *mut *mut IsmBursts,
) -> IsmStatus {
    guard(|| {
        let r = deref(rec, "rec")?;
        let slot = out(out_bursts, "out_bursts")?;
        let cfg = config
            .as_ref()
            .map(DetectorConfig::from)
            .unwrap_or_default();
        let bursts = detect_bursts(&r.rec, &cfg)?;
        *slot = boxed(IsmBursts { bursts });
        Ok(())
    })
}

/// # Safety
/// `bursts` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_bursts_len(
    bursts: *const IsmBursts,
    out_len: *mut usize,
) -> IsmStatus {
    guard(|| {
        let b = deref(bursts, "bursts")?;
        *out(out_len, "out_len")? = b.bursts.len();
        Ok(())
    })
}

/// Burst `index` as a half-open sample interval.
///
/// # Safety
/// `bursts` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_bursts_get(
    bursts: *const IsmBursts,
    index: usize,
    out_start: *mut usize,
    out_end: *mut usize,
) -> IsmStatus {
    guard(|| {
        let b = deref(bursts, "bursts")?;
        let d = b.bursts.get(index).ok_or_else(|| {
            invalid(format!(
                "burst index {index} out of range ({} bursts)",
                b.bursts.len()
            ))
        })?;
        let (s, e) = (out(out_start, "out_start")?, out(out_end, "out_end")?);
        *s = d.start_sample;
        *e = d.end_sample;
        Ok(())
    })
}

/// Precision and recall of `bursts` against the truth of `rec`.
///
/// # Safety
/// Both handles must be live; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_bursts_score(
    bursts: *const IsmBursts,
    rec: *const IsmRecording,
    out_precision: *mut f64,
    out_recall: *mut f64,
) -> IsmStatus {
    guard(|| {
        let b = deref(bursts, "bursts")?;
        let t = truth_of(deref(rec, "rec")?)?;
        let (p, r) = (
            out(out_precision, "out_precision")?,
            out(out_recall, "out_recall")?,
        );
        let s = score_detections(&b.bursts, t);
        *p = s.precision;
        *r = s.recall;
        Ok(())
    })
}

/// # Safety
/// `bursts` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ism_bursts_free(bursts: *mut IsmBursts) {
    free(bursts);
}

/// Features of every burst but the first, as rows of
/// `(frame_width_us, silence_gap_us, papr_db)`. `out_rows` receives the row
/// count. With `rows` NULL only the count is reported; otherwise `rows` must
/// hold `3 * capacity` doubles and a short buffer fails without writing.
///
/// # Safety
/// Handles must be live; `rows` NULL or valid for `3 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn ism_extract_features(
    rec: *const IsmRecording,
    bursts: *const IsmBursts,
    rows: *mut f64,
    capacity: usize,
    out_rows: *mut usize,
) -> IsmStatus {
    guard(|| {
        let r = deref(rec, "rec")?;
        let b = deref(bursts, "bursts")?;
        let n_out = out(out_rows, "out_rows")?;
        let feats = frame_features(&r.rec, &b.bursts)?;
        *n_out = feats.len();
        if rows.is_null() {
            return Ok(());
        }
        if capacity < feats.len() {
            return Err(invalid(format!(
                "buffer holds {capacity} rows, {} needed",
                feats.len()
            )));
        }
        let dst = std::slice::from_raw_parts_mut(rows, 3 * feats.len());
        for (chunk, f) in dst.chunks_exact_mut(3).zip(&feats) {
            chunk.copy_from_slice(&f.to_array());
        }
        Ok(())
    })
}

/// Loads a model JSON written by `ismclass train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_model_read(
    path: *const c_char,
    out_model: *mut *mut IsmModel,
) -> IsmStatus {
    guard(|| {
        let path = Path::new(string(path, "path")?);
        let slot = out(out_model, "out_model")?;
        let model: TrainedModel = ismclass::io::read_json(path)?;
        *slot = boxed(IsmModel { model });
        Ok(())
    })
}

/// Trains `method` ("svm-linear", "svm-poly", "svm-rbf" or "knn") with
/// default hyperparameters on a raw or standardized dataset CSV. `features`
/// is "time" or "time+papr".
///
/// # Safety
/// Strings must be NUL-terminated; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_model_train_csv(
    csv_path: *const c_char,
    method: *const c_char,
    features: *const c_char,
    out_model: *mut *mut IsmModel,
) -> IsmStatus {
    guard(|| {
        let path = Path::new(string(csv_path, "csv_path")?);
        let method: Method = string(method, "method")?.parse()?;
        let features: FeatureSet = string(features, "features")?.parse()?;
        let slot = out(out_model, "out_model")?;
        let ds = load_dataset(path)?;
        let mut spec = MethodSpec::new(method, features);
        if let Some(s) = &ds.standardization {
            spec.scaling = s.options();
        }
        let model = train_model(&spec, &ds)?;
        *slot = boxed(IsmModel { model });
        Ok(())
    })
}

/// Writes the model as JSON.
///
/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ism_model_write(model: *const IsmModel, path: *const c_char) -> IsmStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let path = Path::new(string(path, "path")?);
        Ok(ismclass::io::write_json(path, &m.model)?)
    })
}

/// Classifies one raw feature vector; `out_label` receives the label code.
///
/// # Safety
/// `model` must be a live handle; `out_label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ism_model_predict(
    model: *const IsmModel,
    frame_width_us: f64,
    silence_gap_us: f64,
    papr_db: f64,
    out_label: *mut u8,
) -> IsmStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let slot = out(out_label, "out_label")?;
        let x = FeatureVector::new(frame_width_us, silence_gap_us, papr_db);
        if !x.to_array().iter().all(|v| v.is_finite()) {
            return Err(invalid("features must be finite"));
        }
        *slot = m.model.predict_raw(&x).code();
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ism_model_free(model: *mut IsmModel) {
    free(model);
}
