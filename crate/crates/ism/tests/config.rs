use ism::config::{parse_config, Format, InitName, KernelKind, Model, DEFAULT_DT, DEFAULT_STRIDE};
use ism_core::integrators::{Scheme, XUpdate};
use ism_core::interactions::{RadialProfile, SelfTerm};

const MINIMAL: &str = "model = deterministic\n[params]\nN = 10\n[kernel]\ntype = constant\n[integration]\nt_end = 1\n[init]\nname = uniform_sphere\n";

fn errors(text: &str) -> Vec<String> {
    parse_config(text).unwrap_err().iter().map(|e| e.to_string()).collect()
}

#[test]
fn minimal_config_gets_documented_defaults() {
    let c = parse_config(MINIMAL).unwrap();
    assert_eq!(c.model, Model::Deterministic);
    let it = c.integration.as_ref().unwrap();
    assert_eq!((it.dt, it.stride), (DEFAULT_DT, DEFAULT_STRIDE));
    assert_eq!((it.dt, it.stride), (1e-3, 100));
    assert_eq!(it.seed, Some(0));
    assert_eq!(it.scheme, Some(Scheme::Strang));
    assert_eq!(it.x_update, Some(XUpdate::Chord));
    let p = c.params.as_ref().unwrap();
    assert_eq!((p.v, p.coupling, p.eta, p.nu, p.n_agents), (1.0, 1.0, Some(0.0), Some(0.0), Some(10)));
    let k = c.kernel.as_ref().unwrap();
    assert_eq!((k.kind, k.value, k.self_term), (KernelKind::Constant, Some(1.0), Some(SelfTerm::Include)));
    let init = c.init.as_ref().unwrap();
    assert_eq!(init.name, InitName::UniformSphere);
    assert_eq!((init.real("box"), init.real("spin_std")), (1.0, 0.5));
    assert_eq!(c.output.directory, "out");
    assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
}

#[test]
fn distance_exponent_above_one_is_a_range_error() {
    let text = "model = deterministic\n[params]\nN = 10\n[kernel]\ntype = distance\nprofile = indicator\nradius = 1\nq = 1.5\n[integration]\nt_end = 1\n[init]\nname = uniform_sphere\n";
    let errs = parse_config(text).unwrap_err();
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].line, Some(8));
    assert!(errs[0].message.contains("out of range"), "{}", errs[0]);
}

#[test]
fn duplicate_key_names_both_lines() {
    let text = MINIMAL.replace("N = 10\n", "N = 10\nv = 1\nN = 12\n");
    let errs = errors(&text);
    assert_eq!(errs, vec!["line 5: duplicate key `N` at lines 3 and 5".to_string()]);
}

#[test]
fn unknown_keys_and_sections_are_rejected_with_locations() {
    let errs = errors(&MINIMAL.replace("N = 10\n", "N = 10\nmass = 2\n"));
    assert_eq!(errs, vec!["line 4: unknown key `mass` in [params] for model `deterministic`".to_string()]);

    let errs = errors(&format!("{MINIMAL}[extras]\nfoo = 1\n"));
    assert!(errs[0].starts_with("line 10: unknown section [extras]"), "{errs:?}");

    // A key valid elsewhere is still unknown where it does not apply.
    let errs = errors(&MINIMAL.replace("type = constant\n", "type = constant\nradius = 1\n"));
    assert!(errs[0].contains("unknown key `radius` in [kernel] for a constant kernel"), "{errs:?}");
}

#[test]
fn type_mismatches_are_reported_per_line() {
    let errs = errors(&MINIMAL.replace("N = 10", "N = ten").replace("t_end = 1", "t_end = soon"));
    assert_eq!(errs.len(), 2, "{errs:?}");
    assert!(errs[0].starts_with("line 3: `N` expects a nonnegative integer"));
    assert!(errs[1].starts_with("line 7: `t_end` expects a finite number"));
    let errs = errors(&MINIMAL.replace("t_end = 1", "t_end = inf"));
    assert!(errs[0].contains("finite number"));
}

#[test]
fn stochastic_models_need_a_seed() {
    let text = MINIMAL.replace("deterministic", "stochastic");
    let errs = errors(&text);
    assert_eq!(errs, vec!["line 6: stochastic models need an explicit `seed`".to_string()]);
    let c = parse_config(&text.replace("t_end = 1", "t_end = 1\nseed = 18446744073709551615")).unwrap();
    assert_eq!(c.integration.unwrap().seed, Some(u64::MAX));
}

#[test]
fn model_specific_restrictions() {
    let free = MINIMAL.replace("deterministic", "free_space").replace(
        "type = constant",
        "type = rank\nprofile = indicator\nradius = 0.5",
    );
    assert!(errors(&free)[0].contains("kernel type `rank` out of range for model `free_space`"));

    let missing = "model = monokinetic_1d\n[params]\nJ = 1\n";
    let errs = errors(missing);
    assert!(errs.iter().any(|e| e.contains("needs a [kernel] section")));
    assert!(errs.iter().any(|e| e.contains("needs a [init] section")));

    let wrong_init = MINIMAL.replace("uniform_sphere", "helix_chain");
    assert!(errors(&wrong_init)[0].contains("not available for model `deterministic`"));

    let eq = MINIMAL.replace("uniform_sphere", "equilibrium");
    assert!(errors(&eq)[0].contains("eta > 0 and nu > 0"));

    let polar = "model = polar_2d\n[kernel]\ntype = distance\n[integration]\nt_end = 1\n[init]\nname = rotating_annulus\n";
    assert!(errors(polar)[0].starts_with("line 4: section [integration] is not used by model `polar_2d`"));
}

#[test]
fn missing_or_unknown_model() {
    assert_eq!(errors("[params]\nN = 3\n"), vec!["missing `model = ...` before the first section".to_string()]);
    assert!(errors("model = boids\n")[0].starts_with("line 1: unknown model `boids`"));
}

#[test]
fn table_profiles_and_weights_parse() {
    let text = "model = deterministic\n[params]\nN = 3\n[kernel]\ntype = rank\nprofile = table\nknots = 0:1, 0.5:0.25, 1:0\nself_term = exclude\n[integration]\nt_end = 0\n[init]\nname = two_groups\nangle = 1.5\n";
    let c = parse_config(text).unwrap();
    let k = c.kernel.unwrap();
    assert_eq!(
        k.profile,
        Some(RadialProfile::Table {
            knots: vec![(0.0, 1.0), (0.5, 0.25), (1.0, 0.0)]
        })
    );
    assert_eq!(k.self_term, Some(SelfTerm::Exclude));

    let w = MINIMAL.replace("N = 10", "N = 3").replace("type = constant", "type = multiplicative\nweights = 1, 2");
    assert!(errors(&w)[0].contains("2 weights given for N = 3"));
}

#[test]
fn printing_and_parsing_round_trip() {
    let mut texts: Vec<String> = std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
        .unwrap()
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    assert!(texts.len() >= 7);
    texts.push(MINIMAL.to_string());
    texts.push("model = stochastic\n[params]\nN = 3\nnu = 0.1\neta = 0.3\nv = 2.5\n[kernel]\ntype = multiplicative\nweights = 0.5, 1e-3, 7\n[integration]\nt_end = 0.1\nseed = 5\nscheme = composition4\nx_update = arc\n[init]\nname = aligned_perturbed\naxis = 0.1, -2, 3\ndelta = 0.3\n[analysis]\nwindow = 0.25\ntol = 1e-9\n[output]\ndirectory = somewhere/else\nformats = json\n".to_string());
    texts.push("model = deterministic\n[params]\nN = 4\n[kernel]\ntype = distance\nprofile = table\nknots = 0:1, 0.3:0.7, 0.9:0\nq = 0.1\n[integration]\nt_end = 1\n[init]\nname = uniform_sphere\n".to_string());
    for text in texts {
        let c = parse_config(&text).unwrap_or_else(|e| panic!("{e:?}\n{text}"));
        let printed = c.to_string();
        let again = parse_config(&printed).unwrap_or_else(|e| panic!("{e:?}\n{printed}"));
        assert_eq!(again, c);
        assert_eq!(again.to_string(), printed);
    }
}
