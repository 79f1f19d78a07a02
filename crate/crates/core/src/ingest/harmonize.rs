use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{Panel, PanelObservation, Variable};

use super::rules::HarmonizationRules;

/// Merges panels into one, applying the affine unit rules.
///
/// The merged registry lists variables by first appearance, scanning sources
/// in a canonical order (by their smallest row key), so the result does not
/// depend on the order of `panels`.
pub fn harmonize(panels: &[Panel], rules: &HarmonizationRules) -> Result<Panel> {
    rules.validate()?;
    let mut sources: Vec<&Panel> = panels.iter().collect();
    sources.sort_by(|a, b| {
        let ka = a.observations().first().map(PanelObservation::key);
        let kb = b.observations().first().map(PanelObservation::key);
        ka.cmp(&kb).then_with(|| {
            let na: Vec<&str> = a.registry().iter().map(|v| v.name.as_str()).collect();
            let nb: Vec<&str> = b.registry().iter().map(|v| v.name.as_str()).collect();
            na.cmp(&nb)
        })
    });

    // Units after conversion, per source.
    let converted_units: Vec<Vec<Option<String>>> = sources
        .iter()
        .map(|p| {
            p.registry()
                .iter()
                .map(|v| match rules.unit_conversions.get(&v.name) {
                    Some(rule) if rule.applies_to(v.unit.as_deref()) => {
                        rule.to_unit.clone().or_else(|| v.unit.clone())
                    }
                    _ => v.unit.clone(),
                })
                .collect()
        })
        .collect();

    let mut registry: Vec<Variable> = Vec::new();
    let mut position: BTreeMap<String, usize> = BTreeMap::new();
    for (p, units) in sources.iter().zip(&converted_units) {
        for (v, unit) in p.registry().iter().zip(units) {
            match position.get(&v.name) {
                None => {
                    position.insert(v.name.clone(), registry.len());
                    registry.push(Variable::new(v.name.clone(), unit.clone()));
                }
                Some(&i) => match (&registry[i].unit, unit) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(Error::IncompatibleUnits {
                            variable: v.name.clone(),
                            first: a.clone(),
                            second: b.clone(),
                        })
                    }
                    (None, Some(b)) => registry[i].unit = Some(b.clone()),
                    _ => {}
                },
            }
        }
    }

    let mut seen = HashSet::new();
    let mut observations = Vec::new();
    for p in &sources {
        let rule_for: Vec<_> = p
            .registry()
            .iter()
            .map(|v| {
                rules
                    .unit_conversions
                    .get(&v.name)
                    .filter(|r| r.applies_to(v.unit.as_deref()))
            })
            .collect();
        let target: Vec<usize> = p.registry().iter().map(|v| position[&v.name]).collect();
        for obs in p.observations() {
            if !seen.insert(obs.key()) {
                return Err(Error::ConflictingKeys(obs.key().to_string()));
            }
            let mut values = vec![None; registry.len()];
            let mut imputed = vec![false; registry.len()];
            for (j, v) in obs.values.iter().enumerate() {
                values[target[j]] = match (v, rule_for[j]) {
                    (Some(x), Some(rule)) => Some(rule.apply(*x)),
                    (v, _) => *v,
                };
                imputed[target[j]] = obs.imputed[j];
            }
            observations.push(PanelObservation {
                country: obs.country,
                year: obs.year,
                sector: obs.sector,
                values,
                imputed,
            });
        }
    }
    Panel::new(registry, observations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_panel_csv, UnitConversion};

    fn parse(csv: &str) -> Panel {
        parse_panel_csv(csv, &HarmonizationRules::default()).unwrap()
    }

    #[test]
    fn identity_rules_leave_panel_bitwise_equal() {
        let p = parse("country,year,sector,t,r\nUGA,2010,agriculture,-0.0,NA\nKEN,2011,industry,2.5,1\n");
        let h = harmonize(std::slice::from_ref(&p), &HarmonizationRules::default()).unwrap();
        assert_eq!(h, p);
        assert!(h.observations()[1].values[0].unwrap().is_sign_negative());
    }

    #[test]
    fn affine_rule_applied() {
        let p = parse("country,year,sector,temperature\nUGA,2010,agriculture,253\n");
        let mut rules = HarmonizationRules::default();
        rules
            .unit_conversions
            .insert("temperature".into(), UnitConversion::new(0.1, 0.0));
        let h = harmonize(&[p], &rules).unwrap();
        assert!((h.observations()[0].values[0].unwrap() - 25.3).abs() < 1e-12);
    }

    #[test]
    fn disjoint_union_and_missing_fill() {
        let a = parse("country,year,sector,t\nUGA,2010,agriculture,1\nUGA,2011,agriculture,2\n");
        let b = parse("country,year,sector,t,gdp\nKEN,2010,agriculture,3,500\n");
        let h = harmonize(&[a.clone(), b.clone()], &HarmonizationRules::default()).unwrap();
        assert_eq!(h.len(), 3);
        let gdp = h.variable_index("gdp").unwrap();
        let uga = h.observations().iter().find(|o| o.country.as_str() == "UGA").unwrap();
        assert_eq!(uga.values[gdp], None);
        let h2 = harmonize(&[b, a], &HarmonizationRules::default()).unwrap();
        assert_eq!(h, h2);
    }

    #[test]
    fn conflicting_keys_and_units() {
        let a = parse("country,year,sector,t\nUGA,2010,agriculture,1\n");
        assert!(matches!(
            harmonize(&[a.clone(), a], &HarmonizationRules::default()),
            Err(Error::ConflictingKeys(_))
        ));
        let a = parse("country,year,sector,t[degC]\nUGA,2010,agriculture,25\n");
        let b = parse("country,year,sector,t[dC]\nKEN,2010,agriculture,250\n");
        assert!(matches!(
            harmonize(&[a.clone(), b.clone()], &HarmonizationRules::default()),
            Err(Error::IncompatibleUnits { .. })
        ));
        let mut rules = HarmonizationRules::default();
        rules.unit_conversions.insert(
            "t".into(),
            UnitConversion {
                factor: 0.1,
                offset: 0.0,
                from_unit: Some("dC".into()),
                to_unit: Some("degC".into()),
            },
        );
        let h = harmonize(&[a, b], &rules).unwrap();
        let ken = h.observations().iter().find(|o| o.country.as_str() == "KEN").unwrap();
        assert_eq!(ken.values[0], Some(25.0));
        assert_eq!(h.registry()[0].unit.as_deref(), Some("degC"));
    }
}
