#!/usr/bin/env python3
"""Writes the bundled fixture data under fixtures/.

Everything here is synthetic except the Wikidata id of Tabernaemontana
coffeoides (Q15376858). Re-run after editing, then re-author the cassettes
with tools/fixtures/author_cassettes.sh.
"""

import csv
import json
import pathlib
import urllib.parse

ROOT = pathlib.Path(__file__).resolve().parents[2] / "fixtures"
NS = "https://enpkg.commons-lab.org/kg/"
WD = "http://www.wikidata.org/entity/"
CHEMBL = "https://www.ebi.ac.uk/chembl/target_report_card/"
GNPS = "https://structure.gnps2.org"
CHEMBL_API = "https://www.ebi.ac.uk/chembl/api/data"

PREFIX = "PREFIX ns1: <https://enpkg.commons-lab.org/kg/>\n"


def write(rel, text):
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_csv(rel, header, rows):
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------- schema

CLASSES = {
    "RawMaterial": "A plant sample as collected, linked to its Wikidata taxon.",
    "LabExtract": "An extract prepared from a raw material.",
    "LCMSAnalysisPos": "A positive-mode LC-MS analysis of an extract.",
    "LCMSFeatureList": "The feature list produced by an LC-MS analysis.",
    "LCMSFeature": "One LC-MS feature (a detected ion).",
    "SiriusStructureAnnotation": "A SIRIUS structure annotation of a feature.",
    "InChIkey2D": "The first block of an InChIKey, identifying a planar structure.",
    "NPCClass": "A chemical class from the NPClassifier taxonomy.",
    "BioAssayResults": "Bioassay measurements for an extract.",
    "ChEMBLTarget": "A biological target from ChEMBL.",
    "WDTaxon": "A Wikidata taxon.",
    "WDChemical": "A Wikidata chemical compound.",
}

PROPERTIES = [
    ("has_wd_id", "RawMaterial", "ns1:WDTaxon"),
    ("submitted_taxon", "RawMaterial", "xsd:string"),
    ("has_lab_process", "RawMaterial", "ns1:LabExtract"),
    ("has_LCMS", "LabExtract", "ns1:LCMSAnalysisPos"),
    ("has_lcms_feature_list", "LCMSAnalysisPos", "ns1:LCMSFeatureList"),
    ("has_lcms_feature", "LCMSFeatureList", "ns1:LCMSFeature"),
    ("has_parent_mass", "LCMSFeature", "xsd:float"),
    ("has_usi", "LCMSFeature", "xsd:string"),
    ("has_sirius_annotation", "LCMSFeature", "ns1:SiriusStructureAnnotation"),
    ("has_zodiac_score", "SiriusStructureAnnotation", "xsd:float"),
    ("has_cosmic_score", "SiriusStructureAnnotation", "xsd:float"),
    ("has_InChIkey2D", "SiriusStructureAnnotation", "ns1:InChIkey2D"),
    ("has_npc_class", "InChIkey2D", "ns1:NPCClass"),
    ("has_wikidata_compound", "InChIkey2D", "ns1:WDChemical"),
    ("has_bioassay_results", "LabExtract", "ns1:BioAssayResults"),
    ("target_id", "BioAssayResults", "ns1:ChEMBLTarget"),
    ("inhibition_percentage", "BioAssayResults", "xsd:float"),
]


def schema_ttl():
    out = [
        "@prefix ns1: <%s> ." % NS,
        "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .",
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
        "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .",
        "",
    ]
    for name, comment in CLASSES.items():
        out.append('ns1:%s a rdfs:Class ;\n    rdfs:comment "%s" .' % (name, comment))
    out.append("")
    for name, domain, rng in PROPERTIES:
        out.append("ns1:%s a rdf:Property ;\n    rdfs:domain ns1:%s ;\n    rdfs:range %s ." % (name, domain, rng))
    return "\n".join(out) + "\n"


SMALL_SCHEMA = """@prefix ex: <http://example.org/lab/> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .

ex:Plant a owl:Class .
ex:Extract a owl:Class .
ex:Feature a owl:Class .
ex:Annotation a rdfs:Class .
ex:Compound a rdfs:Class .

ex:hasExtract a owl:ObjectProperty ; rdfs:domain ex:Plant ; rdfs:range ex:Extract .
ex:hasFeature a owl:ObjectProperty ; rdfs:domain ex:Extract ; rdfs:range ex:Feature .
ex:annotatedAs a owl:ObjectProperty ; rdfs:domain ex:Feature ; rdfs:range ex:Annotation .
ex:score a owl:DatatypeProperty ; rdfs:domain ex:Annotation ; rdfs:range xsd:double .
"""

# ---------------------------------------------------------------- graph

NPC = {
    "aspidosperma": ("Aspidosperma type", "npc_Aspidosperma_type"),
    "iboga": ("Iboga type", "npc_Iboga_type"),
    "flavonols": ("Flavonols", "npc_Flavonols"),
    "tetraketide": ("Tetraketide meroterpenoids", "npc_Tetraketide_meroterpenoids"),
}
EXTRA_NPC = [
    ("Pyrrolizidine alkaloids", "npc_Pyrrolizidine_alkaloids"),
    ("Coumarins", "npc_Coumarins"),
    ("Corynanthe type", "npc_Corynanthe_type"),
]

# InChIkey2D -> (NPC class key, Wikidata compound or None)
INCHIKEYS = {
    "ik2d_AAAAAAAAAAAAAA": ("aspidosperma", "Q90000101"),
    "ik2d_BBBBBBBBBBBBBB": ("iboga", "Q90000102"),
    "ik2d_CCCCCCCCCCCCCC": ("aspidosperma", "Q90000104"),
    "ik2d_DDDDDDDDDDDDDD": ("flavonols", None),
    "ik2d_EEEEEEEEEEEEEE": ("tetraketide", "Q90000103"),
}
IK = list(INCHIKEYS)

PLANTS = [
    # key, name, wikidata id, extracts: {extract: [features]}
    ("tc", "Tabernaemontana coffeoides", "Q15376858", {"ext_tc_1": [1, 2, 3, 4, 5], "ext_tc_2": [6, 7, 8]}),
    ("mu", "Melochia umbellata", "Q90000003", {"ext_mu_1": [1, 2, 3, 4]}),
    ("ob", "Ochrosia borbonica", "Q90000004", {"ext_ob_1": []}),
]
BULK_FEATURES = 600  # unannotated features of ext_ob_1, for large result sets

# feature -> list of (zodiac, cosmic, inchikey index)
ANNOTATIONS = {
    "f_tc_1": [("0.95", "0.5", 0), ("0.97", "0.6", 1)],  # qualifies twice
    "f_tc_2": [("0.91", "0.31", 0)],
    "f_tc_3": [("0.9", "0.8", 2)],  # zodiac on the boundary
    "f_tc_4": [("0.99", "0.3", 3)],  # cosmic on the boundary
    "f_tc_6": [("0.92", "0.45", 0)],
    "f_tc_7": [("0.5", "0.9", 4)],
    "f_tc_8": [("0.95", "0.2", 3)],
    "f_mu_1": [("0.99", "0.9", 0)],  # qualifies, other plant
    "f_mu_2": [("0.8", "0.8", 2)],
    "f_mu_3": [("0.93", "0.5", 4)],
}
MASSES = {"f_tc_1": "325.18", "f_tc_2": "311.17", "f_tc_3": "353.21", "f_tc_4": "611.16", "f_tc_5": "180.07",
          "f_tc_6": "339.2", "f_tc_7": "415.21", "f_tc_8": "303.05", "f_mu_1": "325.18", "f_mu_2": "297.16",
          "f_mu_3": "520.3", "f_mu_4": "149.02"}
USIS = {"f_tc_7": "mzspec:MSV000000001:fixture_tc_2.mgf:scan:7", "f_mu_3": "mzspec:MSV000000001:fixture_mu_1.mgf:scan:3"}
BIOASSAYS = [
    ("bio_1", "ext_tc_1", "CHEMBL367", "62.5"),
    ("bio_2", "ext_mu_1", "CHEMBL367", "30.0"),
    ("bio_3", "ext_tc_2", "CHEMBL220", "75.0"),
]


def graph_ttl():
    out = ["@prefix ns1: <%s> ." % NS, "@prefix wd: <%s> ." % WD, ""]
    for key, name, qid, extracts in PLANTS:
        out.append("ns1:rm_%s a ns1:RawMaterial ;\n    ns1:has_wd_id wd:%s ;\n    ns1:submitted_taxon \"%s\" ." %
                   (key, qid, name))
        out.append("wd:%s a ns1:WDTaxon ." % qid)
        for ext, feats in extracts.items():
            n = ext.split("_", 1)[1]
            out.append("ns1:rm_%s ns1:has_lab_process ns1:%s ." % (key, ext))
            out.append("ns1:%s a ns1:LabExtract ;\n    ns1:has_LCMS ns1:lcms_%s ." % (ext, n))
            out.append("ns1:lcms_%s a ns1:LCMSAnalysisPos ;\n    ns1:has_lcms_feature_list ns1:fl_%s ." % (n, n))
            out.append("ns1:fl_%s a ns1:LCMSFeatureList ." % n)
            names = ["f_%s_%d" % (key, i) for i in feats]
            if ext == "ext_ob_1":
                names = ["f_ob_%04d" % i for i in range(1, BULK_FEATURES + 1)]
            for f in names:
                out.append("ns1:fl_%s ns1:has_lcms_feature ns1:%s ." % (n, f))
                props = ["a ns1:LCMSFeature"]
                if f in MASSES:
                    props.append("ns1:has_parent_mass %s" % MASSES[f])
                if f in USIS:
                    props.append('ns1:has_usi "%s"' % USIS[f])
                for j, _ in enumerate(ANNOTATIONS.get(f, [])):
                    props.append("ns1:has_sirius_annotation ns1:ann_%s_%d" % (f[2:], j + 1))
                out.append("ns1:%s %s ." % (f, " ;\n    ".join(props)))
                for j, (z, c, ik) in enumerate(ANNOTATIONS.get(f, [])):
                    out.append("ns1:ann_%s_%d a ns1:SiriusStructureAnnotation ;\n    ns1:has_zodiac_score %s ;\n"
                               "    ns1:has_cosmic_score %s ;\n    ns1:has_InChIkey2D ns1:%s ." %
                               (f[2:], j + 1, z, c, IK[ik]))
    out.append("")
    for ik, (cls, wdc) in INCHIKEYS.items():
        props = ["a ns1:InChIkey2D", "ns1:has_npc_class ns1:%s" % NPC[cls][1]]
        if wdc:
            props.append("ns1:has_wikidata_compound wd:%s" % wdc)
        out.append("ns1:%s %s ." % (ik, " ;\n    ".join(props)))
    for label, iri in list(NPC.values()) + EXTRA_NPC:
        out.append('ns1:%s a ns1:NPCClass ;\n    ns1:label "%s" .' % (iri, label))
    out.append("")
    for bio, ext, target, pct in BIOASSAYS:
        out.append("ns1:%s ns1:has_bioassay_results ns1:%s ." % (ext, bio))
        out.append("ns1:%s a ns1:BioAssayResults ;\n    ns1:target_id <%s%s> ;\n    ns1:inhibition_percentage %s ." %
                   (bio, CHEMBL, target, pct))
        out.append("<%s%s> a ns1:ChEMBLTarget ." % (CHEMBL, target))
    return "\n".join(out) + "\n"


WIKIDATA_TTL = """@prefix wd: <http://www.wikidata.org/entity/> .
@prefix wdt: <http://www.wikidata.org/prop/direct/> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .

wd:Q90000001 wdt:P225 "Tabernaemontana" ;
    wdt:P105 wd:Q34740 ;
    rdfs:label "Tabernaemontana"@en .
wd:Q15376858 wdt:P225 "Tabernaemontana coffeoides" ;
    wdt:P171 wd:Q90000001 ;
    rdfs:label "Tabernaemontana coffeoides"@en .
wd:Q90000002 wdt:P225 "Tabernaemontana divaricata" ;
    wdt:P171 wd:Q90000001 ;
    rdfs:label "crape jasmine"@en .
wd:Q90000003 wdt:P225 "Melochia umbellata" ;
    rdfs:label "Melochia umbellata"@en .

wd:Q90000101 wdt:P703 wd:Q15376858 .
wd:Q90000102 wdt:P703 wd:Q90000002 .
wd:Q90000105 wdt:P703 wd:Q90000002 .
wd:Q90000103 wdt:P703 wd:Q90000003 .

wd:Q90000201 wdt:P225 "Duplicata ambigua" .
wd:Q90000202 wdt:P225 "Duplicata ambigua" .
"""

# ---------------------------------------------------------------- HTTP mocks

INDOLE = "c1ccc2c(c1)cc[nH]2"
INDOLE_KEY = "SIKJAQJRHWYJAI-UHFFFAOYSA-N"


def enc(s):
    return urllib.parse.quote(s, safe="-._~")


def chembl_xml(hits):
    body = "".join("<target><target_chembl_id>%s</target_chembl_id><pref_name>%s</pref_name>"
                   "<target_type>%s</target_type></target>" % h for h in hits)
    return ('<?xml version="1.0" encoding="utf-8"?>\n<response><page_meta><total_count>%d</total_count>'
            "</page_meta><targets>%s</targets></response>\n" % (len(hits), body))


def routes():
    r = [
        {"url": "%s/inchikey?smiles=%s" % (GNPS, enc(INDOLE)), "status": 200, "content_type": "text/plain",
         "body": INDOLE_KEY},
        {"url": "%s/inchikey?smiles=%s" % (GNPS, enc("not a smiles")), "status": 400,
         "content_type": "text/plain", "body": "could not parse SMILES"},
        {"url": "%s/target/search?q=%s" % (CHEMBL_API, enc("Leishmania donovani")), "status": 200,
         "content_type": "application/xml",
         "body_file": "chembl_leishmania.xml"},
        {"url": "%s/target/search?q=%s" % (CHEMBL_API, enc("acetylcholinesterase")), "status": 200,
         "content_type": "application/xml", "body_file": "chembl_ache.xml"},
        {"url": "%s/target/search?q=%s" % (CHEMBL_API, enc("unobtainium receptor")), "status": 200,
         "content_type": "application/xml", "body_file": "chembl_none.xml"},
    ]
    return {"routes": r}


# ---------------------------------------------------------------- files

def mgf(n):
    blocks = []
    for i in range(1, n + 1):
        blocks.append("BEGIN IONS\nFEATURE_ID=%d\nPEPMASS=%.4f\nCHARGE=1+\nMSLEVEL=2\n%.4f 120\n%.4f 45\nEND IONS\n" %
                      (i, 300 + i * 11.1, 91.054 + i, 144.08 + i))
    return "\n".join(blocks)


TABLE = [["sample", "extract", "feature_count", "mean_mz"]] + [
    ["S%02d" % i, "ext_%02d" % i, str(10 + 3 * i), "%.2f" % (250 + 7.5 * i)] for i in range(1, 11)]

# ---------------------------------------------------------------- queries

FIG2A_QUESTION = ("How many metabolites were annotated with SIRIUS in Tabernaemontana coffeoides molecular formula "
                  "score (ZODIAC) above 0.9 and confidence score (COSMIC) above 0.3 ?")
FIG2A_QUERY = PREFIX + """SELECT (COUNT(DISTINCT ?feature) AS ?metaboliteCount)
WHERE { ?rawMaterial ns1:has_wd_id <http://www.wikidata.org/entity/Q15376858> .
?rawMaterial ns1:has_lab_process ?labExtract .
?labExtract ns1:has_LCMS ?analysis . ?analysis
ns1:has_lcms_feature_list ?featureList . ?featureList
ns1:has_lcms_feature ?feature . ?feature
ns1:has_sirius_annotation ?annotation . ?annotation
ns1:has_zodiac_score ?zodiacScore . ?annotation
ns1:has_cosmic_score ?cosmicScore . FILTER(?zodiacScore > 0.9 && ?cosmicScore > 0.3) }"""

FEATURES_WRONG = PREFIX + """SELECT DISTINCT ?feature WHERE {
  ?annotation ns1:has_sirius_annotation ?feature .
  ?annotation ns1:has_zodiac_score ?z ; ns1:has_cosmic_score ?c .
  FILTER(?z > 0.9 && ?c > 0.3)
}"""
FEATURES_RIGHT = PREFIX + """SELECT DISTINCT ?feature WHERE {
  ?feature ns1:has_sirius_annotation ?annotation .
  ?annotation ns1:has_zodiac_score ?z ; ns1:has_cosmic_score ?c .
  FILTER(?z > 0.9 && ?c > 0.3)
}
ORDER BY ?feature"""
HEAVY_WRONG = PREFIX + """SELECT ?feature ?mass WHERE {
  ?feature a ns1:LCMSFeatureList ; ns1:has_parent_mass ?mass .
  FILTER(?mass > 5000)
}"""
HEAVY_RIGHT = PREFIX + """SELECT ?feature ?mass WHERE {
  ?feature a ns1:LCMSFeature ; ns1:has_parent_mass ?mass .
  FILTER(?mass > 5000)
}"""
UNANNOTATED = PREFIX + """SELECT ?feature WHERE {
  ?feature a ns1:LCMSFeature .
  MINUS { ?feature ns1:has_sirius_annotation ?annotation . }
}
ORDER BY ?feature"""
EXTRACTS = PREFIX + "SELECT ?extract WHERE { ?extract a ns1:LabExtract . } ORDER BY ?extract"
ASPIDO_QUESTION = "Which plant extracts have the highest count of metabolites annotated as aspidosperma-type alkaloids?"
ASPIDO_QUERY = PREFIX + """SELECT ?extract (COUNT(DISTINCT ?feature) AS ?featureCount) WHERE {
  ?extract ns1:has_LCMS ?analysis .
  ?analysis ns1:has_lcms_feature_list ?list .
  ?list ns1:has_lcms_feature ?feature .
  ?feature ns1:has_sirius_annotation ?annotation .
  ?annotation ns1:has_InChIkey2D ?ik .
  ?ik ns1:has_npc_class <https://enpkg.commons-lab.org/kg/npc_Aspidosperma_type> .
}
GROUP BY ?extract
ORDER BY DESC(?featureCount)"""
BIOASSAY_QUESTION = ("Which lab extracts have bioassay results with inhibition percentages above 50% against "
                     "Leishmania donovani?")
BIOASSAY_QUERY = PREFIX + """SELECT ?extract ?inhibition WHERE {
  ?extract ns1:has_bioassay_results ?assay .
  ?assay ns1:target_id <https://www.ebi.ac.uk/chembl/target_report_card/CHEMBL367> ;
         ns1:inhibition_percentage ?inhibition .
  FILTER(?inhibition > 50)
}"""


def fence(q, lead="Here is the query."):
    return "%s\n\n```sparql\n%s\n```\n" % (lead, q)


def j(obj):
    return json.dumps(obj, separators=(", ", ": "))


def resp(purpose, obj):
    return {"purpose": purpose, "text": obj if isinstance(obj, str) else j(obj)}


NEW = resp("entry", {"classification": "NewKnowledge"})
FOLLOW = resp("entry", {"classification": "HelpMeUnderstand"})


def valid(plants=(), mentions=()):
    return resp("validator", {"verdict": "Valid", "feedback": "", "plants": list(plants),
                              "mentions": [{"text": t, "kind": k} for t, k in mentions]})


def sup(mentions=(), interpret=False, rerun=False, answer=""):
    return resp("supervisor", {"mentions": [{"text": t, "kind": k} for t, k in mentions], "interpret": interpret,
                               "rerun": rerun, "answer": answer})


def runner(question, taxon=None):
    return resp("sparql_runner", {"question": question, "wikidata_taxon": taxon})


TC = ("Tabernaemontana coffeoides", "taxon")


def cassette_scripts():
    s = {}
    s["fig2a"] = {"sessions": [{"turns": [{"question": FIG2A_QUESTION, "responses": [
        NEW,
        valid(["Tabernaemontana coffeoides"], [TC]),
        sup([TC]),
        resp("kg", {"calls": [{"tool": "taxon_resolver", "input": TC[0], "mention": TC[0]}]}),
        sup([TC]),
        runner(FIG2A_QUESTION),
        resp("sparql_generate", fence(FIG2A_QUERY, "The query follows the path from the plant to its annotations.")),
        sup([TC], answer="I resolved the plant to its Wikidata entity and counted the annotated features."),
    ]}]}]}

    q = "Which LC-MS features have a SIRIUS annotation with a ZODIAC score above 0.9 and a COSMIC score above 0.3?"
    s["refine_resolved"] = {"sessions": [{"turns": [{"question": q, "responses": [
        NEW, valid(), sup(), runner(q),
        resp("sparql_generate", fence(FEATURES_WRONG)),
        resp("sparql_refine", fence(FEATURES_RIGHT, "The annotation property points from the feature.")),
        sup(),
    ]}]}]}

    q = "Which LC-MS features have a parent mass above 5000?"
    s["refine_absent"] = {"sessions": [{"turns": [{"question": q, "responses": [
        NEW, valid(), sup(), runner(q),
        resp("sparql_generate", fence(HEAVY_WRONG)),
        resp("sparql_refine", fence(HEAVY_RIGHT)),
        sup(),
    ]}]}]}

    q = "List all LC-MS features that have no SIRIUS annotation and summarize them."
    s["spill"] = {"sessions": [{"turns": [{"question": q, "responses": [
        NEW, valid(), sup(interpret=True), runner(q),
        resp("sparql_generate", fence(UNANNOTATED)),
        sup(interpret=True),
        resp("interpreter", "Most unannotated features come from a single Ochrosia borbonica extract."),
        sup(interpret=True),
    ]}]}]}

    s["rejection"] = {"sessions": [{"turns": [{"question": "What is the capital of France?", "responses": [
        NEW,
        resp("validator", {"verdict": "Invalid", "feedback": "The question is not about the metabolomics knowledge "
                                                             "graph.", "plants": [], "mentions": []}),
    ]}]}]}

    s["plant_absent"] = {"sessions": [{"turns": [{"question": "List metabolites of PlantNotInDb x.", "responses": [
        NEW, valid(["PlantNotInDb x"], [("PlantNotInDb x", "taxon")]),
    ]}]}]}

    aspido = ("aspidosperma-type alkaloids", "chemical_class")
    plot_q = "Can you generate a distribution plot for the count of features for those extracts?"
    s["followup"] = {"sessions": [{"turns": [
        {"question": ASPIDO_QUESTION, "responses": [
            NEW, valid([], [aspido]), sup([aspido]),
            resp("kg", {"calls": [{"tool": "chemical_resolver", "input": aspido[0], "mention": aspido[0]}]}),
            sup([aspido]), runner(ASPIDO_QUESTION),
            resp("sparql_generate", fence(ASPIDO_QUERY)),
            sup([aspido], answer="Here is the list of plant extracts ranked by annotated features."),
        ]},
        {"question": plot_q, "responses": [
            FOLLOW, sup(interpret=True),
            resp("interpreter", "ext_tc_1 has the most aspidosperma-type features, followed by ext_mu_1."),
            sup(interpret=True, answer="Here is the distribution plot for the count of features."),
        ]},
    ]}]}

    q = "List all lab extracts in the graph."
    oscillate = [NEW, valid(), sup(rerun=True)]
    for _ in range(5):
        oscillate += [runner(q), resp("sparql_generate", fence(EXTRACTS)), sup(rerun=True)]
    s["oscillate"] = {"sessions": [{"turns": [{"question": q, "responses": oscillate}]}]}

    s["bioassay"] = {"sessions": [{"turns": [{"question": BIOASSAY_QUESTION, "responses": [
        NEW, valid([], [("Leishmania donovani", "target")]),
        sup([("Leishmania donovani", "target")]),
        resp("kg", {"calls": [{"tool": "target_resolver", "input": "Leishmania donovani",
                               "mention": "Leishmania donovani"}]}),
        sup([("Leishmania donovani", "target")]),
        runner(BIOASSAY_QUESTION),
        resp("sparql_generate", fence(BIOASSAY_QUERY)),
        sup([("Leishmania donovani", "target")]),
    ]}]}]}

    s["single_shot_eval"] = {"eval_dataset": "../eval/dataset.csv",
                             "responses": [resp("sparql_generate", fence(qr)) for qr in SINGLE_SHOT]}
    s["smoke_eval"] = {"eval_dataset": "../eval/smoke.csv", "responses": SMOKE}
    return s


# ---------------------------------------------------------------- evaluation

DATASET = [
    ("How many lab extracts are in the graph?",
     PREFIX + "SELECT (COUNT(DISTINCT ?e) AS ?n) WHERE { ?e a ns1:LabExtract . }", "low"),
    ("How many LC-MS features are in the graph?",
     PREFIX + "SELECT (COUNT(DISTINCT ?f) AS ?n) WHERE { ?f a ns1:LCMSFeature . }", "low"),
    ("List the NPClassifier classes present in the graph.",
     PREFIX + "SELECT DISTINCT ?c WHERE { ?c a ns1:NPCClass . }", "low"),
    ("Which lab extracts come from Tabernaemontana coffeoides?",
     PREFIX + "SELECT ?e WHERE { ?rm ns1:has_wd_id <http://www.wikidata.org/entity/Q15376858> ; "
              "ns1:has_lab_process ?e . }", "medium"),
    (FIG2A_QUESTION, FIG2A_QUERY, "medium"),
    (BIOASSAY_QUESTION, BIOASSAY_QUERY, "medium"),
    ("List the LC-MS features with a parent mass above 500.",
     PREFIX + "SELECT ?f ?m WHERE { ?f ns1:has_parent_mass ?m . FILTER(?m > 500) }", "medium"),
    (ASPIDO_QUESTION, ASPIDO_QUERY, "high"),
    ("For each plant taxon, how many distinct NPClassifier classes are annotated in its extracts?",
     PREFIX + """SELECT ?taxon (COUNT(DISTINCT ?cls) AS ?classes) WHERE {
  ?rm ns1:has_wd_id ?taxon ; ns1:has_lab_process ?e .
  ?e ns1:has_LCMS/ns1:has_lcms_feature_list/ns1:has_lcms_feature ?f .
  ?f ns1:has_sirius_annotation/ns1:has_InChIkey2D/ns1:has_npc_class ?cls .
}
GROUP BY ?taxon""", "high"),
    ("Which features annotated as Tetraketide meroterpenoids have a USI?",
     PREFIX + """SELECT ?f ?usi WHERE {
  ?f ns1:has_usi ?usi ; ns1:has_sirius_annotation ?a .
  ?a ns1:has_InChIkey2D ?ik .
  ?ik ns1:has_npc_class <https://enpkg.commons-lab.org/kg/npc_Tetraketide_meroterpenoids> .
}""", "high"),
]

SINGLE_SHOT = [
    # variable renamed: correct
    PREFIX + "SELECT (COUNT(DISTINCT ?extract) AS ?total) WHERE { ?extract a ns1:LabExtract . }",
    PREFIX + "SELECT (COUNT(DISTINCT ?f) AS ?n) WHERE { ?f a ns1:LCMSFeature . }",
    PREFIX + "SELECT DISTINCT ?cls WHERE { ?cls a ns1:NPCClass . }",
    # wrong taxon constant
    PREFIX + "SELECT ?e WHERE { ?rm ns1:has_wd_id <http://www.wikidata.org/entity/Q90000003> ; "
             "ns1:has_lab_process ?e . }",
    FIG2A_QUERY,
    # wrong threshold
    BIOASSAY_QUERY.replace("?inhibition > 50", "?inhibition > 20"),
    PREFIX + "SELECT ?feature ?mass WHERE { ?feature ns1:has_parent_mass ?mass . FILTER(?mass > 500) }",
    # no grouping constraint on the class
    ASPIDO_QUERY.replace("  ?ik ns1:has_npc_class <https://enpkg.commons-lab.org/kg/npc_Aspidosperma_type> .\n", ""),
    "I am not able to write this query.",
    DATASET[9][1],
]

SMOKE_ROWS = [DATASET[0], DATASET[1], DATASET[4]]
SMOKE = [
    # q1: answered correctly
    NEW, valid(), sup(), runner(DATASET[0][0]),
    resp("sparql_generate", fence(SINGLE_SHOT[0])), sup(),
    # q2: validator wrongly rejects
    NEW, resp("validator", {"verdict": "Invalid", "feedback": "LC-MS features are not part of the graph.",
                            "plants": [], "mentions": []}),
    # q3: supervisor skips entity resolution; the query matches a wrong name and counts 0
    NEW, valid(["Tabernaemontana coffeoides"], [TC]), sup(), runner(FIG2A_QUESTION),
    resp("sparql_generate", fence(FIG2A_QUERY.replace(
        "?rawMaterial ns1:has_wd_id <http://www.wikidata.org/entity/Q15376858> .",
        '?rawMaterial ns1:submitted_taxon "T. coffeoides" .'))),
    sup(),
]

STORE = [
    ("Which LC-MS features of Melochia umbellata have a SIRIUS annotation with a ZODIAC score above 0.8?",
     PREFIX + """SELECT DISTINCT ?feature WHERE {
  ?rm ns1:has_wd_id <http://www.wikidata.org/entity/Q90000003> ; ns1:has_lab_process ?e .
  ?e ns1:has_LCMS/ns1:has_lcms_feature_list/ns1:has_lcms_feature ?feature .
  ?feature ns1:has_sirius_annotation ?a .
  ?a ns1:has_zodiac_score ?z .
  FILTER(?z > 0.8)
}"""),
    ("Which LC-MS features have a parent mass above 600?",
     PREFIX + "SELECT ?feature ?mass WHERE { ?feature a ns1:LCMSFeature ; ns1:has_parent_mass ?mass . "
              "FILTER(?mass > 600) }"),
    ("How many lab extracts are in the graph?",
     PREFIX + "SELECT (COUNT(DISTINCT ?e) AS ?n) WHERE { ?e a ns1:LabExtract . }"),
    ("Which extracts were tested against acetylcholinesterase?",
     PREFIX + """SELECT ?extract WHERE {
  ?extract ns1:has_bioassay_results ?assay .
  ?assay ns1:target_id <https://www.ebi.ac.uk/chembl/target_report_card/CHEMBL220> .
}"""),
]


def config(cassette, pipeline="full", label="fixture"):
    return {
        "label": label,
        "pipeline": pipeline,
        "model": "gpt-4o",
        "mode": "replay",
        "kg_endpoint": "local:../enpkg/graph.ttl",
        "wikidata_endpoint": "local:../wikidata/graph.ttl",
        "chembl_base_url": CHEMBL_API,
        "gnps_base_url": GNPS,
        "http_fixtures": "../http/routes.json",
        "schema": "../enpkg/schema.ttl",
        "plant_db": "../resources/plants.csv",
        "plant_column": "plant_name",
        "chemical_index": "../resources/npc_classes.csv",
        "refinement_store": "../resources/refinement_store.csv",
        "prompts_dir": "../../prompts",
        "artifact_root": "../../build/artifacts",
        "cassette": "../cassettes/%s.jsonl" % cassette,
        "step_cap": 12,
        "rates": {"gpt-4o": {"input": 2.5e-6, "output": 1.0e-5}},
        "exclusions": [],
    }


def main():
    write("enpkg/schema.ttl", schema_ttl())
    write("enpkg/schema_small.ttl", SMALL_SCHEMA)
    write("enpkg/graph.ttl", graph_ttl())
    write("wikidata/graph.ttl", WIKIDATA_TTL)
    write_csv("resources/plants.csv", ["plant_name", "family"],
              [["Tabernaemontana coffeoides", "Apocynaceae"], ["Melochia umbellata", "Malvaceae"],
               ["Ochrosia borbonica", "Apocynaceae"], ["Tabernaemontana divaricata", "Apocynaceae"],
               ["Rauvolfia vomitoria", "Apocynaceae"]])
    write_csv("resources/npc_classes.csv", ["label", "iri"],
              [[label, NS + iri] for label, iri in list(NPC.values()) + EXTRA_NPC])
    write_csv("resources/refinement_store.csv", ["question", "reference_query"], STORE)
    write("http/routes.json", json.dumps(routes(), indent=2) + "\n")
    write("http/chembl_leishmania.xml", chembl_xml([("CHEMBL367", "Leishmania donovani", "ORGANISM")]))
    write("http/chembl_ache.xml", chembl_xml([("CHEMBL220", "Acetylcholinesterase", "SINGLE PROTEIN")]))
    write("http/chembl_none.xml", chembl_xml([]))
    write("files/spectra.mgf", mgf(7))
    write_csv("files/table.csv", TABLE[0], TABLE[1:])
    write("files/empty.txt", "")
    write_csv("eval/dataset.csv", ["question", "reference_query", "complexity"], DATASET)
    write_csv("eval/smoke.csv", ["question", "reference_query", "complexity"], SMOKE_ROWS)
    for name, script in cassette_scripts().items():
        write("cassettes/%s.script.json" % name, json.dumps(script, indent=2) + "\n")
    write("config/fixture.json", json.dumps(config("fig2a"), indent=2) + "\n")
    write("config/single_shot.json",
          json.dumps(config("single_shot_eval", "single_shot", "single_shot"), indent=2) + "\n")
    smoke = config("smoke_eval", label="full")
    smoke["exclusions"] = [{"question_id": "2", "reason": "validator behaviour under review"}]
    write("config/smoke.json", json.dumps(smoke, indent=2) + "\n")


if __name__ == "__main__":
    main()
