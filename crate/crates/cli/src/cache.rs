//! Content-addressed disk cache for kernel tables.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use resurge_core::borel::{build_kernel_auto, KernelRecord, KernelTable};
use resurge_core::numeric::{Cx, Real};
use resurge_core::series::GermData;
use resurge_core::Result;

pub const CACHE_ENV: &str = "RESURGE_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct KernelCache {
    pub dir: Option<PathBuf>,
    pub hits: std::cell::Cell<usize>,
    pub misses: std::cell::Cell<usize>,
}

impl KernelCache {
    /// `$RESURGE_CACHE_DIR` if set, else `<out>/cache`.
    pub fn for_output(out: &Path) -> Self {
        let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| out.join("cache"));
        KernelCache { dir: Some(dir), hits: Default::default(), misses: Default::default() }
    }

    pub fn disabled() -> Self {
        KernelCache { dir: None, hits: Default::default(), misses: Default::default() }
    }

    /// sha256 over the germ coefficients, α, depth, precision, reach and tolerance.
    pub fn key<R: Real>(data: &GermData<R>, alpha: Cx<R>, reach: f64, tol: f64) -> String {
        let mut h = Sha256::new();
        let mut put = |s: String| {
            h.update(s.as_bytes());
            h.update(b"|");
        };
        let parts = |z: &Cx<R>| format!("{:?}{:?}", z.re.parts(), z.im.parts());
        put(format!("num:{}", data.spec.num.iter().map(parts).collect::<String>()));
        put(format!("den:{}", data.spec.den.iter().map(parts).collect::<String>()));
        put(format!("alpha:{}", parts(&alpha)));
        put(format!("D:{}", data.depth));
        put(format!("precision:{}", R::NAME));
        put(format!("reach:{:?}", reach.to_bits()));
        put(format!("tol:{:?}", tol.to_bits()));
        format!("{:x}", h.finalize())
    }

    pub fn kernel<R: Real>(&self, data: &GermData<R>, alpha: Cx<R>, reach: f64, tol: f64) -> Result<KernelTable<R>> {
        let Some(dir) = &self.dir else {
            return build_kernel_auto(data, alpha, reach, tol);
        };
        let file = dir.join(format!("kernel-{}.json", Self::key(data, alpha, reach, tol)));
        if let Some(k) = fs::read_to_string(&file)
            .ok()
            .and_then(|t| serde_json::from_str::<KernelRecord>(&t).ok())
            .and_then(|r| KernelTable::from_record(&r).ok())
        {
            self.hits.set(self.hits.get() + 1);
            return Ok(k);
        }
        self.misses.set(self.misses.get() + 1);
        let k = build_kernel_auto(data, alpha, reach, tol)?;
        // a failed write only costs a rebuild next time
        if fs::create_dir_all(dir).is_ok() {
            let tmp = file.with_extension("tmp");
            if let Ok(text) = serde_json::to_string(&k.record()) {
                if fs::write(&tmp, text).is_ok() {
                    let _ = fs::rename(&tmp, &file);
                }
            }
        }
        Ok(k)
    }
}
