//! Python bindings. Images and masks cross the boundary as raw bytes in
//! row-major order; structured results come back as plain dicts.

use std::path::PathBuf;

use egoseg_cli::{commands::evaluate, CliError, RunConfig};
use egoseg_core::{
    self as eg, BandMode, BinaryMask, ChromaThresholds, CompositeConfig, DepthBand, DepthImage,
    MorphConfig, RgbImage, SkinBand,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn to_py(e: eg::Error) -> PyErr {
    match e {
        eg::Error::Io { .. } | eg::Error::Image { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn cli_to_py(e: CliError) -> PyErr {
    match e {
        CliError::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Binary mask; `bytes` holds one byte per pixel, 255 for foreground.
#[pyclass(name = "Mask", module = "egoseg", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyMask(BinaryMask);

#[pymethods]
impl PyMask {
    /// Bytes >= 128 are foreground.
    #[new]
    fn new(width: u32, height: u32, data: &[u8]) -> PyResult<Self> {
        BinaryMask::from_bytes(width, height, data)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_labels(width: u32, height: u32, labels: Vec<bool>) -> PyResult<Self> {
        BinaryMask::from_labels(width, height, labels)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        eg::io::load_mask(&path).map(Self).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        eg::io::save_mask(&path, &self.0).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.to_bytes())
    }

    fn labels(&self) -> Vec<bool> {
        self.0.labels().to_vec()
    }

    fn foreground_count(&self) -> usize {
        self.0.foreground_count()
    }

    fn foreground_fraction(&self) -> f64 {
        self.0.foreground_fraction()
    }

    fn complement(&self) -> Self {
        Self(self.0.complement())
    }

    fn __repr__(&self) -> String {
        format!(
            "Mask({}x{}, foreground={})",
            self.0.width(),
            self.0.height(),
            self.0.foreground_count()
        )
    }
}

/// 8-bit RGB image; `bytes` is interleaved RGB.
#[pyclass(name = "Image", module = "egoseg", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyImage(RgbImage);

#[pymethods]
impl PyImage {
    #[new]
    fn new(width: u32, height: u32, data: Vec<u8>) -> PyResult<Self> {
        RgbImage::from_raw(width, height, data)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        eg::io::load_rgb(&path).map(Self).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        eg::io::save_rgb(&path, &self.0).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.as_raw())
    }

    fn get(&self, x: u32, y: u32) -> PyResult<(u8, u8, u8)> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err(format!(
                "pixel ({x}, {y}) out of bounds"
            )));
        }
        let [r, g, b] = self.0.get(x, y);
        Ok((r, g, b))
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.0.width(), self.0.height())
    }
}

fn parse_band_mode(s: &str) -> PyResult<BandMode> {
    match s {
        "inside-band" => Ok(BandMode::InsideBand),
        "outside-band" => Ok(BandMode::OutsideBand),
        other => Err(PyValueError::new_err(format!(
            "band_mode must be 'inside-band' or 'outside-band', got '{other}'"
        ))),
    }
}

fn thresholds(h1: f64, h2: f64, s1: f64, band_mode: &str) -> PyResult<ChromaThresholds> {
    let t = ChromaThresholds {
        h1,
        h2,
        s1,
        band_mode: parse_band_mode(band_mode)?,
    };
    t.validate().map_err(to_py)?;
    Ok(t)
}

#[pyfunction]
fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let p = eg::rgb_to_hsv([r, g, b]);
    (p.h, p.s, p.v)
}

#[pyfunction]
fn select_frames(frame_count: usize, stride: usize) -> PyResult<Vec<usize>> {
    eg::select_frames(frame_count, stride).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (image, h1=0.22, h2=0.45, s1=0.20, band_mode="inside-band"))]
fn chroma_mask(
    py: Python<'_>,
    image: &PyImage,
    h1: f64,
    h2: f64,
    s1: f64,
    band_mode: &str,
) -> PyResult<PyMask> {
    let t = thresholds(h1, h2, s1, band_mode)?;
    Ok(PyMask(py.detach(|| eg::chroma_mask(&image.0, &t))))
}

#[pyfunction]
#[pyo3(signature = (mask, open_radius=1, close_radius=2, min_component_area=64))]
fn morph_clean(
    py: Python<'_>,
    mask: &PyMask,
    open_radius: u32,
    close_radius: u32,
    min_component_area: u64,
) -> PyMask {
    let cfg = MorphConfig {
        open_radius,
        close_radius,
        min_component_area,
    };
    PyMask(py.detach(|| eg::morph_clean(&mask.0, &cfg)))
}

/// Chroma mask plus cleanup; the area threshold is given for a 720x720
/// frame and scaled to the input size.
#[pyfunction]
#[pyo3(signature = (
    image, h1=0.22, h2=0.45, s1=0.20, band_mode="inside-band",
    open_radius=1, close_radius=2, min_component_area=64,
))]
#[allow(clippy::too_many_arguments)]
fn extract_groundtruth(
    py: Python<'_>,
    image: &PyImage,
    h1: f64,
    h2: f64,
    s1: f64,
    band_mode: &str,
    open_radius: u32,
    close_radius: u32,
    min_component_area: u64,
) -> PyResult<PyMask> {
    let t = thresholds(h1, h2, s1, band_mode)?;
    let morph = MorphConfig {
        open_radius,
        close_radius,
        min_component_area,
    }
    .scaled_for(image.0.width(), image.0.height());
    Ok(PyMask(
        py.detach(|| eg::extract_groundtruth(&image.0, &t, &morph)),
    ))
}

#[pyfunction]
#[pyo3(signature = (image, hue_ranges=None, s_min=None, s_max=None, v_min=None))]
fn skin_segment(
    py: Python<'_>,
    image: &PyImage,
    hue_ranges: Option<Vec<(f64, f64)>>,
    s_min: Option<f64>,
    s_max: Option<f64>,
    v_min: Option<f64>,
) -> PyResult<PyMask> {
    let d = SkinBand::default();
    let band = SkinBand {
        hue_ranges: hue_ranges
            .map(|r| r.into_iter().map(|(a, b)| [a, b]).collect())
            .unwrap_or(d.hue_ranges),
        s_min: s_min.unwrap_or(d.s_min),
        s_max: s_max.unwrap_or(d.s_max),
        v_min: v_min.unwrap_or(d.v_min),
    };
    band.validate().map_err(to_py)?;
    Ok(PyMask(py.detach(|| eg::skin_segment(&image.0, &band))))
}

/// `depths` are millimetres, row-major, 0 meaning no reading.
#[pyfunction]
#[pyo3(signature = (width, height, depths, d_min=None, d_max=None, fill_holes=None))]
fn depth_segment(
    py: Python<'_>,
    width: u32,
    height: u32,
    depths: Vec<u16>,
    d_min: Option<u16>,
    d_max: Option<u16>,
    fill_holes: Option<bool>,
) -> PyResult<PyMask> {
    let d = DepthBand::default();
    let band = DepthBand {
        d_min: d_min.unwrap_or(d.d_min),
        d_max: d_max.unwrap_or(d.d_max),
        fill_holes: fill_holes.unwrap_or(d.fill_holes),
    };
    band.validate().map_err(to_py)?;
    let depth = DepthImage::from_raw(width, height, depths).map_err(to_py)?;
    Ok(PyMask(py.detach(|| eg::depth_segment(&depth, &band))))
}

#[pyfunction]
#[pyo3(signature = (foreground, mask, background, feather_radius=0))]
fn composite(
    py: Python<'_>,
    foreground: &PyImage,
    mask: &PyMask,
    background: &PyImage,
    feather_radius: u32,
) -> PyResult<PyImage> {
    let cfg = CompositeConfig {
        feather_radius,
        ..CompositeConfig::default()
    };
    py.detach(|| eg::composite(&foreground.0, &mask.0, &background.0, &cfg))
        .map(PyImage)
        .map_err(to_py)
}

#[pyfunction]
fn confusion<'py>(py: Python<'py>, gt: &PyMask, pred: &PyMask) -> PyResult<Bound<'py, PyDict>> {
    let c = eg::confusion(&gt.0, &pred.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("tp", c.tp)?;
    d.set_item("fp", c.fp)?;
    d.set_item("fn", c.fn_)?;
    d.set_item("tn", c.tn)?;
    Ok(d)
}

/// Percent IoU of the foreground class, or None when both masks are empty.
#[pyfunction]
fn iou_arm(gt: &PyMask, pred: &PyMask) -> PyResult<Option<f64>> {
    Ok(eg::iou_arm(&eg::confusion(&gt.0, &pred.0).map_err(to_py)?))
}

/// Percent of groundtruth foreground missed, or None when it is empty.
#[pyfunction]
fn miss_rate(gt: &PyMask, pred: &PyMask) -> PyResult<Option<f64>> {
    Ok(eg::miss_rate(
        &eg::confusion(&gt.0, &pred.0).map_err(to_py)?,
    ))
}

/// Per-pixel foreground occupancy in [0, 1], row-major.
#[pyfunction]
fn heatmap(masks: Vec<PyRef<'_, PyMask>>, width: u32, height: u32) -> PyResult<Vec<f64>> {
    let h = eg::heatmap(masks.iter().map(|m| &m.0), (width, height)).map_err(to_py)?;
    Ok(h.occupancy())
}

/// Runs the evaluation command on a pairs file and returns its summary.
#[pyfunction]
#[pyo3(signature = (pairs_file, out_dir, config=None))]
fn evaluate_pairs<'py>(
    py: Python<'py>,
    pairs_file: PathBuf,
    out_dir: PathBuf,
    config: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::load_or_default(config.as_deref()).map_err(cli_to_py)?;
    let summary = py
        .detach(|| evaluate::run(&pairs_file, &out_dir, &cfg))
        .map_err(cli_to_py)?;
    let value = serde_json::to_value(&summary).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

#[pymodule]
fn egoseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("MASK_THRESHOLD", eg::MASK_THRESHOLD)?;
    m.add_class::<PyMask>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(rgb_to_hsv, m)?)?;
    m.add_function(wrap_pyfunction!(select_frames, m)?)?;
    m.add_function(wrap_pyfunction!(chroma_mask, m)?)?;
    m.add_function(wrap_pyfunction!(morph_clean, m)?)?;
    m.add_function(wrap_pyfunction!(extract_groundtruth, m)?)?;
    m.add_function(wrap_pyfunction!(skin_segment, m)?)?;
    m.add_function(wrap_pyfunction!(depth_segment, m)?)?;
    m.add_function(wrap_pyfunction!(composite, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(iou_arm, m)?)?;
    m.add_function(wrap_pyfunction!(miss_rate, m)?)?;
    m.add_function(wrap_pyfunction!(heatmap, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_pairs, m)?)?;
    Ok(())
}
