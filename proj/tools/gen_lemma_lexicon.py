#!/usr/bin/env python3
"""Regenerates data/lemmas_en.tsv from the word lists below.

Surface forms are produced with regular English inflection rules plus an
irregular table. A surface form that is itself a listed base word is never
emitted, so every lemma maps to itself (the lexicon is closed).
"""
import sys

NOUNS = """
access account action activity add-on address admin administrator agent alarm
album alert answer app application archive article attachment attacker
attempt audio backup badge balance bank bar battery bill blog board book
bookmark border box browser bug button cache calendar call camera card cart
case category cell change channel character chart chat check child choice
city client clip code color column comment community company computer concern
connection contact content context conversation cookie copy cost country
coupon course credential credit customer dashboard data database date day
deal default delay detail device dialog difference directory discount disk
display document domain download draft drive duplicate edit editor effect
element email emoji entry error event exception extension face feature feed
field file filter folder follower font form format forum friend function game
gmail group guest hack hacker hashtag header history hole home hour icon idea
image inbox information input installation interface invitation invite issue
item key keyboard label language laptop layout leak level license like limit
line link list location lock log login machine mail mailbox map member
memory menu merge message method minute mode model money month music name
network news note notification number offer option order owner page pane
panel paragraph parent part partner password path pattern payment people
permission person phone photo picture pin place plan platform player playlist
plugin point policy post preference price privacy problem product profile
program project property provider purchase query question queue quota reader
reason receipt recipient record reference refund region reminder reply
report request result review right role rule sale schedule screen script
search second section security sender server service session setting share
sheet shortcut signature site size slide snippet song sound source space spam
speed spreadsheet stack star status step storage store story stream style
subject subscription suggestion summary support sync system tab table tag
task team template term test text theme thread threat time timeline timezone
tip title token tool topic track transfer trash tweet type update upload url
usage user username version video view virus visitor wall way web webpage
website week window word workspace year
""".split()

VERBS = """
access accept add allow archive ask assign attach attack back backup block
book bookmark break browse build call cancel change charge chat check choose
clean clear click close collaborate comment compare complain configure
confirm connect contain control convert copy correct count crash create
customize cut decide decline delete deny detect disable display divide do
download drag drop eavesdrop edit embed enable encrypt end enter erase
export fail filter find fix follow forget format forward get give grant
group guess hack happen help hide highlight host ignore import improve
include increase insert install invite join keep know label launch learn
leave like limit link list load lock log login look lose make manage mark
match mention merge message migrate move mute name need notice notify open
order organize own paste pay pin plan play post prevent print protect
publish purchase push put read receive recover redirect reduce refresh
register reload remember remove rename reorder repeat replace reply report
request reset resize restore restrict retrieve return revoke run save scan
schedule search secure see select send separate set setup share show sign
snooze sort split spam start stay steal stop store stream submit subscribe
suggest switch sync tag take talk tell test track transfer translate trust
try turn type unblock undo unfollow uninstall unlink unlock unsubscribe
update upgrade upload use verify view vote want watch work write
""".split()

IRREGULAR = {
    "break": ["broke", "broken"], "build": ["built"], "buy": ["bought"],
    "choose": ["chose", "chosen"], "cut": [], "do": ["did", "done"],
    "find": ["found"], "forget": ["forgot", "forgotten"],
    "get": ["got", "gotten"], "give": ["gave", "given"], "hide": ["hid", "hidden"],
    "keep": ["kept"], "know": ["knew", "known"], "leave": ["left"],
    "lose": ["lost"], "make": ["made"], "pay": ["paid"], "put": [],
    "read": [], "run": ["ran"], "see": ["saw", "seen"], "send": ["sent"],
    "set": [], "setup": [], "show": ["showed", "shown"], "split": [], "steal": ["stole", "stolen"],
    "take": ["took", "taken"], "tell": ["told"], "write": ["wrote", "written"],
    "undo": ["undid", "undone"], "upload": [],
}
IRREGULAR_PLURAL = {"person": "people", "child": "children", "datum": "data",
                    "index": "indices", "analysis": "analyses", "life": "lives",
                    "shelf": "shelves", "knife": "knives", "wife": "wives"}
DOUBLING = {"stop", "split", "drop", "drag", "plan", "set", "cut", "put", "run",
            "chat", "ban", "tag", "pin", "log", "map", "ship", "admit", "submit",
            "commit", "forget", "get", "begin", "wrap", "zip", "unpin", "flag",
            "eavesdrop", "setup", "mute"}
VOWELS = set("aeiou")


def plural(word):
    if word.endswith(("s", "x", "z", "ch", "sh")):
        return word + "es"
    if word.endswith("y") and len(word) > 1 and word[-2] not in VOWELS:
        return word[:-1] + "ies"
    return word + "s"


def past(word):
    if word in DOUBLING and word != "mute":
        return word + word[-1] + "ed"
    if word.endswith("e"):
        return word + "d"
    if word.endswith("y") and word[-2] not in VOWELS:
        return word[:-1] + "ied"
    return word + "ed"


def gerund(word):
    if word in DOUBLING and word != "mute":
        return word + word[-1] + "ing"
    if word.endswith("ie"):
        return word[:-2] + "ying"
    if word.endswith("e") and not word.endswith(("ee", "ye", "oe")):
        return word[:-1] + "ing"
    return word + "ing"


def main(out):
    bases = set(NOUNS) | set(VERBS)
    pairs = {}

    def emit(surface, lemma):
        if surface == lemma or surface in bases:
            return
        pairs.setdefault(surface, lemma)

    for noun in NOUNS:
        emit(plural(noun), noun)
    for singular, pl in IRREGULAR_PLURAL.items():
        if pl not in bases:
            emit(pl, singular)
    for verb in VERBS:
        emit(plural(verb), verb)
        emit(gerund(verb), verb)
        if verb in IRREGULAR:
            for form in IRREGULAR[verb]:
                emit(form, verb)
        else:
            emit(past(verb), verb)
    for surface in sorted(pairs):
        out.write(f"{surface}\t{pairs[surface]}\n")


if __name__ == "__main__":
    with open(sys.argv[1] if len(sys.argv) > 1 else "data/lemmas_en.tsv", "w") as f:
        main(f)
