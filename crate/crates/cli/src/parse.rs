use aamr::bench::{AlphaFamily, ProfileMethod};
use aamr::solvers::Schedule;
use aamr::{MethodSpec, Vector};

pub fn vector(text: &str, what: &str) -> Result<Vector, String> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(Vector::from_vec(v)),
        _ => Err(format!(
            "{what}: expected comma-separated finite numbers, got {text:?}"
        )),
    }
}

fn number(text: &str, entry: &str) -> Result<f64, String> {
    text.parse::<f64>()
        .map_err(|_| format!("method {entry:?}: {text:?} is not a number"))
}

/// `name[:p1[:p2]]` roster entries for the angle profile.
pub fn profile_method(entry: &str) -> Result<ProfileMethod, String> {
    let parts: Vec<&str> = entry.trim().split(':').collect();
    let arg = |i: usize, default: f64| parts.get(i).map_or(Ok(default), |p| number(p, entry));
    let spec = match (parts[0], parts.len()) {
        ("map", 1) => MethodSpec::Map,
        ("rap-opt", 1) => return Ok(ProfileMethod::RapOptimal),
        ("rap", 2) => MethodSpec::Rap { mu: arg(1, 1.0)? },
        ("drm", 1 | 2) => MethodSpec::Drm { alpha: arg(1, 0.5)? },
        ("haugazeau", 1) => MethodSpec::Haugazeau,
        ("hlwb", 1) => MethodSpec::hlwb(),
        ("aamr", 1..=3) => MethodSpec::aamr(arg(1, 0.9)?, arg(2, 0.9)?),
        ("cm", 1 | 2) => MethodSpec::cm(arg(1, 0.25)?),
        _ => {
            return Err(format!(
                "unknown method entry {entry:?}; expected map, rap-opt, rap:MU, drm[:ALPHA], haugazeau, hlwb, aamr[:ALPHA[:BETA]] or cm[:GAMMA]"
            ))
        }
    };
    spec.validate()
        .map_err(|e| format!("method {entry:?}: {e}"))?;
    Ok(ProfileMethod::Fixed(spec))
}

pub fn alpha_family(entry: &str) -> Result<AlphaFamily, String> {
    match entry.trim() {
        "aamr" => Ok(AlphaFamily::Aamr),
        "drm" => Ok(AlphaFamily::Drm),
        "cm" => Ok(AlphaFamily::Cm),
        other => Err(format!(
            "alpha sweep supports aamr, drm and cm, got {other:?}"
        )),
    }
}

/// CM with `λ = 2α`.
pub fn cm_spec(gamma: f64, alpha: f64) -> MethodSpec {
    MethodSpec::Cm {
        gamma,
        lambda: Schedule::Constant(2.0 * alpha),
    }
}
