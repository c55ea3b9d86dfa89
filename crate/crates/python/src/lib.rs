use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use delcodec_core::codec::EncodedImage;
use delcodec_core::formats::{self, Generator, SyntheticSpec};
use delcodec_core::{
    compute_gradient, BitDepth, EdgeMode, ImageGrid, KernelSpec, RenderConfig, RenderMethod, ToneMap,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kernel_of(name: &str) -> PyResult<KernelSpec> {
    match name {
        "a" | "A" => Ok(KernelSpec::A),
        "c" | "C" => Ok(KernelSpec::C),
        "fourier" => Ok(KernelSpec::FOURIER),
        _ => Err(PyValueError::new_err(format!("unknown kernel {name:?}"))),
    }
}

fn edge_of(name: &str) -> PyResult<EdgeMode> {
    match name {
        "valid" => Ok(EdgeMode::Valid),
        "wrap" | "circular" => Ok(EdgeMode::Circular),
        _ => Err(PyValueError::new_err(format!("unknown edge mode {name:?}"))),
    }
}

fn method_of(name: &str) -> PyResult<RenderMethod> {
    match name {
        "bin" => Ok(RenderMethod::BinNearest),
        "bilinear" => Ok(RenderMethod::BinBilinear),
        "fourier" => Ok(RenderMethod::Fourier),
        _ => Err(PyValueError::new_err(format!("unknown render method {name:?}"))),
    }
}

/// Grayscale raster, row-major, 8 or 16 bits per sample.
#[pyclass(module = "delcodec", name = "Image", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyImage {
    inner: ImageGrid,
}

#[pymethods]
impl PyImage {
    #[new]
    #[pyo3(signature = (width, height, pixels, depth = 8))]
    fn new(width: usize, height: usize, pixels: Vec<u16>, depth: u8) -> PyResult<Self> {
        let depth = BitDepth::from_bits(depth).map_err(value_err)?;
        let inner = ImageGrid::new(width, height, depth, pixels).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn depth(&self) -> u8 {
        self.inner.depth().bits()
    }

    #[getter]
    fn pixels(&self) -> Vec<u16> {
        self.inner.pixels().to_vec()
    }

    fn get(&self, m: usize, n: usize) -> PyResult<u16> {
        if m >= self.inner.height() || n >= self.inner.width() {
            return Err(PyValueError::new_err("pixel index out of range"));
        }
        Ok(self.inner.get(m, n))
    }

    fn to_pgm<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &formats::write_pgm(&self.inner))
    }

    #[staticmethod]
    fn from_pgm(data: &[u8]) -> PyResult<Self> {
        let inner = formats::read_pgm(data).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Image(width={}, height={}, depth={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.depth().bits()
        )
    }
}

#[pyfunction]
fn read_pgm(path: &str) -> PyResult<PyImage> {
    let bytes = std::fs::read(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
    PyImage::from_pgm(&bytes)
}

#[pyfunction]
fn write_pgm(image: &PyImage, path: &str) -> PyResult<()> {
    std::fs::write(path, formats::write_pgm(&image.inner))
        .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
}

/// `generator` takes the CLI forms: `wedge`, `noise:1`, `lowpass:1:2`, ...
#[pyfunction]
#[pyo3(signature = (generator, width = 256, height = 256, depth = 8))]
fn synthesize(generator: &str, width: usize, height: usize, depth: u8) -> PyResult<PyImage> {
    let g: Generator = generator.parse().map_err(value_err)?;
    let depth = BitDepth::from_bits(depth).map_err(value_err)?;
    let inner = formats::synthesize(&SyntheticSpec::new(g, width, height, depth)).map_err(value_err)?;
    Ok(PyImage { inner })
}

#[pyfunction]
#[pyo3(signature = (image, kernel = "a", edge = "valid", pgs = true))]
fn entropy<'py>(
    py: Python<'py>,
    image: &PyImage,
    kernel: &str,
    edge: &str,
    pgs: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let r = delcodec_core::delentropy(&image.inner, &kernel_of(kernel)?, edge_of(edge)?, pgs)
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("width", r.width)?;
    d.set_item("height", r.height)?;
    d.set_item("bit_depth", r.bit_depth)?;
    d.set_item("kernel", r.kernel.name())?;
    d.set_item("pgs", r.pgs)?;
    d.set_item("sites", r.sites)?;
    d.set_item("zeroth_order", r.zeroth_order)?;
    d.set_item("first_order", r.first_order)?;
    d.set_item("h_fx", r.h_fx)?;
    d.set_item("h_fy", r.h_fy)?;
    d.set_item("joint", r.joint)?;
    d.set_item("delentropy", r.delentropy)?;
    d.set_item("quincunx_pair_entropy", r.quincunx_pair_entropy)?;
    d.set_item("quincunx_bpp", r.quincunx_bpp)?;
    d.set_item("tau", r.tau)?;
    Ok(d)
}

/// Returns the `.dle` container bytes and the rate figures.
#[pyfunction]
fn encode<'py>(py: Python<'py>, image: &PyImage) -> PyResult<(Bound<'py, PyBytes>, Bound<'py, PyDict>)> {
    let (enc, s) = delcodec_core::encode(&image.inner).map_err(value_err)?;
    let bytes = enc.serialize().map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("bpp", s.bpp)?;
    d.set_item("payload_bits", s.payload_bits)?;
    d.set_item("symbol_count", s.symbol_count)?;
    d.set_item("pair_entropy", s.pair_entropy)?;
    d.set_item("bits_per_symbol", s.bits_per_symbol())?;
    d.set_item("total_bytes", s.total_bytes)?;
    d.set_item("side_channel_bytes", s.side_channel_bytes)?;
    d.set_item("max_pre_rounding_error", s.max_pre_rounding_error)?;
    Ok((PyBytes::new(py, &bytes), d))
}

#[pyfunction]
fn decode(data: &[u8]) -> PyResult<PyImage> {
    let enc = EncodedImage::parse(data).map_err(value_err)?;
    let inner = delcodec_core::decode(&enc).map_err(value_err)?;
    Ok(PyImage { inner })
}

/// Deldensity render as `(size, range, values)`, values row-major per unit area.
#[pyfunction]
#[pyo3(signature = (image, size = 256, method = "bilinear", range = None, kernel = "a", edge = "valid"))]
fn render(
    image: &PyImage,
    size: usize,
    method: &str,
    range: Option<f64>,
    kernel: &str,
    edge: &str,
) -> PyResult<(usize, f64, Vec<f64>)> {
    let grad = compute_gradient(&image.inner, &kernel_of(kernel)?, edge_of(edge)?).map_err(value_err)?;
    let cfg = RenderConfig {
        size,
        range: range.unwrap_or_else(|| RenderConfig::auto_range(&grad, size.max(2))),
        method: method_of(method)?,
        tone: ToneMap::Linear,
    };
    let d = delcodec_core::renderer::render(&grad, &cfg).map_err(value_err)?;
    Ok((d.size, d.range, d.values))
}

#[pymodule]
fn delcodec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(read_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(write_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    Ok(())
}
