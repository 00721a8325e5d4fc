#!/usr/bin/env python3
"""Regenerate src/liptrain/data/pron_test.dict.

The vendored test dictionary mixes a hand-curated core of common English
words (ARPABET pronunciations) with systematically built CVC/CCVC filler
words whose pronunciation is defined by construction.  The fillers exist
only to give clustering and distractor code a realistically sized lexicon
(> 1000 entries); they are not claimed to be real English.

Deterministic: running this script twice produces byte-identical output.
"""

from __future__ import annotations

from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "liptrain" / "data" / "pron_test.dict"

# Hand-curated core.  Kept small and boring on purpose; the homophene
# examples (mat/bat/pat vs cat) live here.
CORE = """
about AH0 B AW1 T
after AE1 F T ER0
again AH0 G EH1 N
animal AE1 N AH0 M AH0 L
answer AE1 N S ER0
apple AE1 P AH0 L
back B AE1 K
bad B AE1 D
ball B AO1 L
banana B AH0 N AE1 N AH0
band B AE1 N D
bank B AE1 NG K
bat B AE1 T
bath B AE1 TH
bear B EH1 R
bed B EH1 D
bell B EH1 L
belt B EH1 L T
bend B EH1 N D
best B EH1 S T
big B IH1 G
bird B ER1 D
bite B AY1 T
black B L AE1 K
blue B L UW1
boat B OW1 T
body B AA1 D IY0
bone B OW1 N
book B UH1 K
both B OW1 TH
bottle B AA1 T AH0 L
bowl B OW1 L
box B AA1 K S
boy B OY1
bread B R EH1 D
break B R EY1 K
bright B R AY1 T
bring B R IH1 NG
brother B R AH1 DH ER0
brown B R AW1 N
burn B ER1 N
bus B AH1 S
busy B IH1 Z IY0
butter B AH1 T ER0
buy B AY1
cafe K AH0 F EY1
cake K EY1 K
call K AO1 L
camp K AE1 M P
car K AA1 R
card K AA1 R D
care K EH1 R
carry K AE1 R IY0
cat K AE1 T
catch K AE1 CH
chair CH EH1 R
chance CH AE1 N S
change CH EY1 N JH
chat CH AE1 T
check CH EH1 K
cheese CH IY1 Z
child CH AY1 L D
city S IH1 T IY0
class K L AE1 S
clean K L IY1 N
clear K L IH1 R
climb K L AY1 M
clock K L AA1 K
close K L OW1 Z
cloth K L AO1 TH
cloud K L AW1 D
coat K OW1 T
coffee K AA1 F IY0
cold K OW1 L D
color K AH1 L ER0
come K AH1 M
cook K UH1 K
cool K UW1 L
corn K AO1 R N
count K AW1 N T
cover K AH1 V ER0
cow K AW1
cream K R IY1 M
cross K R AO1 S
crowd K R AW1 D
cup K AH1 P
cut K AH1 T
dance D AE1 N S
dark D AA1 R K
day D EY1
deep D IY1 P
desk D EH1 S K
dinner D IH1 N ER0
dish D IH1 SH
doctor D AA1 K T ER0
dog D AO1 G
door D AO1 R
down D AW1 N
draw D R AO1
dream D R IY1 M
dress D R EH1 S
drink D R IH1 NG K
drive D R AY1 V
drop D R AA1 P
dry D R AY1
duck D AH1 K
ear IH1 R
early ER1 L IY0
earth ER1 TH
east IY1 S T
easy IY1 Z IY0
eat IY1 T
egg EH1 G
eight EY1 T
end EH1 N D
evening IY1 V N IH0 NG
every EH1 V ER0 IY0
eye AY1
face F EY1 S
fall F AO1 L
family F AE1 M AH0 L IY0
farm F AA1 R M
fast F AE1 S T
fat F AE1 T
father F AA1 DH ER0
feel F IY1 L
feet F IY1 T
field F IY1 L D
fight F AY1 T
fill F IH1 L
find F AY1 N D
fine F AY1 N
finger F IH1 NG G ER0
finish F IH1 N IH0 SH
fire F AY1 ER0
first F ER1 S T
fish F IH1 SH
five F AY1 V
fix F IH1 K S
flat F L AE1 T
floor F L AO1 R
flower F L AW1 ER0
fly F L AY1
food F UW1 D
foot F UH1 T
four F AO1 R
free F R IY1
fresh F R EH1 SH
friend F R EH1 N D
front F R AH1 N T
fruit F R UW1 T
full F UH1 L
fun F AH1 N
game G EY1 M
garden G AA1 R D AH0 N
gift G IH1 F T
girl G ER1 L
give G IH1 V
glad G L AE1 D
glass G L AE1 S
gnat N AE1 T
goat G OW1 T
gold G OW1 L D
good G UH1 D
grass G R AE1 S
great G R EY1 T
green G R IY1 N
ground G R AW1 N D
group G R UW1 P
grow G R OW1
hair HH EH1 R
half HH AE1 F
hall HH AO1 L
hand HH AE1 N D
happy HH AE1 P IY0
hard HH AA1 R D
hat HH AE1 T
head HH EH1 D
hear HH IH1 R
heart HH AA1 R T
heavy HH EH1 V IY0
hello HH AH0 L OW1
help HH EH1 L P
high HH AY1
hill HH IH1 L
hold HH OW1 L D
hole HH OW1 L
home HH OW1 M
hope HH OW1 P
horse HH AO1 R S
hot HH AA1 T
hour AW1 ER0
house HH AW1 S
idea AY0 D IY1 AH0
iron AY1 ER0 N
jump JH AH1 M P
keep K IY1 P
key K IY1
kind K AY1 N D
king K IH1 NG
kiss K IH1 S
kitchen K IH1 CH AH0 N
knee N IY1
knife N AY1 F
know N OW1
lady L EY1 D IY0
lake L EY1 K
land L AE1 N D
large L AA1 R JH
last L AE1 S T
late L EY1 T
laugh L AE1 F
learn L ER1 N
leave L IY1 V
left L EH1 F T
leg L EH1 G
letter L EH1 T ER0
life L AY1 F
light L AY1 T
line L AY1 N
lion L AY1 AH0 N
list L IH1 S T
listen L IH1 S AH0 N
little L IH1 T AH0 L
live L IH1 V
long L AO1 NG
look L UH1 K
loud L AW1 D
love L AH1 V
low L OW1
lunch L AH1 N CH
make M EY1 K
man M AE1 N
many M EH1 N IY0
map M AE1 P
mark M AA1 R K
market M AA1 R K AH0 T
mat M AE1 T
meal M IY1 L
meat M IY1 T
meet M IY1 T
milk M IH1 L K
mind M AY1 N D
minute M IH1 N AH0 T
money M AH1 N IY0
month M AH1 N TH
moon M UW1 N
morning M AO1 R N IH0 NG
mother M AH1 DH ER0
mountain M AW1 N T AH0 N
mouse M AW1 S
mouth M AW1 TH
move M UW1 V
music M Y UW1 Z IH0 K
name N EY1 M
near N IH1 R
neck N EH1 K
need N IY1 D
new N UW1
next N EH1 K S T
nice N AY1 S
night N AY1 T
nine N AY1 N
north N AO1 R TH
nose N OW1 Z
note N OW1 T
number N AH1 M B ER0
nurse N ER1 S
ocean OW1 SH AH0 N
office AO1 F AH0 S
often AO1 F AH0 N
old OW1 L D
open OW1 P AH0 N
orange AO1 R AH0 N JH
order AO1 R D ER0
over OW1 V ER0
page P EY1 JH
paint P EY1 N T
pair P EH1 R
paper P EY1 P ER0
park P AA1 R K
part P AA1 R T
party P AA1 R T IY0
pat P AE1 T
pen P EH1 N
pencil P EH1 N S AH0 L
people P IY1 P AH0 L
person P ER1 S AH0 N
picture P IH1 K CH ER0
piece P IY1 S
pig P IH1 G
place P L EY1 S
plan P L AE1 N
plant P L AE1 N T
play P L EY1
please P L IY1 Z
point P OY1 N T
pool P UW1 L
press P R EH1 S
price P R AY1 S
pull P UH1 L
push P UH1 SH
put P UH1 T
queen K W IY1 N
question K W EH1 S CH AH0 N
quick K W IH1 K
quiet K W AY1 AH0 T
rain R EY1 N
rat R AE1 T
read R IY1 D
ready R EH1 D IY0
red R EH1 D
rest R EH1 S T
restaurant R EH1 S T ER0 AA2 N T
rice R AY1 S
rich R IH1 CH
ride R AY1 D
right R AY1 T
ring R IH1 NG
river R IH1 V ER0
road R OW1 D
rock R AA1 K
roll R OW1 L
roof R UW1 F
room R UW1 M
round R AW1 N D
run R AH1 N
sad S AE1 D
safe S EY1 F
salt S AO1 L T
same S EY1 M
sand S AE1 N D
sat S AE1 T
school S K UW1 L
sea S IY1
seat S IY1 T
second S EH1 K AH0 N D
see S IY1
sell S EH1 L
send S EH1 N D
seven S EH1 V AH0 N
shake SH EY1 K
shape SH EY1 P
share SH EH1 R
sharp SH AA1 R P
sheep SH IY1 P
ship SH IH1 P
shirt SH ER1 T
shoe SH UW1
shop SH AA1 P
short SH AO1 R T
show SH OW1
sick S IH1 K
side S AY1 D
sing S IH1 NG
sister S IH1 S T ER0
sit S IH1 T
six S IH1 K S
size S AY1 Z
skin S K IH1 N
sky S K AY1
sleep S L IY1 P
slow S L OW1
small S M AO1 L
smile S M AY1 L
snow S N OW1
soap S OW1 P
sock S AA1 K
soft S AO1 F T
song S AO1 NG
soon S UW1 N
sound S AW1 N D
soup S UW1 P
south S AW1 TH
speak S P IY1 K
spell S P EH1 L
spend S P EH1 N D
spoon S P UW1 N
sport S P AO1 R T
spring S P R IH1 NG
stand S T AE1 N D
star S T AA1 R
start S T AA1 R T
stay S T EY1
step S T EH1 P
stick S T IH1 K
still S T IH1 L
stone S T OW1 N
stop S T AA1 P
store S T AO1 R
story S T AO1 R IY0
street S T R IY1 T
strong S T R AO1 NG
sugar SH UH1 G ER0
summer S AH1 M ER0
sun S AH1 N
sweet S W IY1 T
swim S W IH1 M
table T EY1 B AH0 L
take T EY1 K
talk T AO1 K
tall T AO1 L
tea T IY1
teach T IY1 CH
team T IY1 M
tell T EH1 L
ten T EH1 N
test T EH1 S T
thank TH AE1 NG K
that DH AE1 T
thing TH IH1 NG
think TH IH1 NG K
third TH ER1 D
three TH R IY1
time T AY1 M
today T AH0 D EY1
tomorrow T AH0 M AA1 R OW0
tooth T UW1 TH
top T AA1 P
touch T AH1 CH
town T AW1 N
train T R EY1 N
tree T R IY1
trip T R IH1 P
true T R UW1
try T R AY1
turn T ER1 N
two T UW1
under AH1 N D ER0
vat V AE1 T
visit V IH1 Z AH0 T
voice V OY1 S
wait W EY1 T
walk W AO1 K
wall W AO1 L
want W AA1 N T
warm W AO1 R M
wash W AA1 SH
watch W AA1 CH
water W AO1 T ER0
wear W EH1 R
week W IY1 K
well W EH1 L
west W EH1 S T
wet W EH1 T
white W AY1 T
wide W AY1 D
wife W AY1 F
wind W IH1 N D
window W IH1 N D OW0
winter W IH1 N T ER0
wish W IH1 SH
woman W UH1 M AH0 N
wood W UH1 D
word W ER1 D
work W ER1 K
world W ER1 L D
write R AY1 T
wrong R AO1 NG
year Y IH1 R
yellow Y EH1 L OW0
yes Y EH1 S
young Y AH1 NG
zero Z IH1 R OW0
"""

ONSETS = [
    ("b", "B"), ("bl", "B L"), ("br", "B R"), ("ch", "CH"), ("cl", "K L"),
    ("cr", "K R"), ("d", "D"), ("dr", "D R"), ("f", "F"), ("fl", "F L"),
    ("fr", "F R"), ("g", "G"), ("gl", "G L"), ("gr", "G R"), ("h", "HH"),
    ("j", "JH"), ("k", "K"), ("l", "L"), ("m", "M"), ("n", "N"),
    ("p", "P"), ("pl", "P L"), ("pr", "P R"), ("r", "R"), ("s", "S"),
    ("sh", "SH"), ("sk", "S K"), ("sl", "S L"), ("sm", "S M"), ("sn", "S N"),
    ("sp", "S P"), ("st", "S T"), ("sw", "S W"), ("t", "T"), ("th", "TH"),
    ("tr", "T R"), ("tw", "T W"), ("v", "V"), ("w", "W"), ("z", "Z"),
]
NUCLEI = [
    ("a", "AE1"), ("e", "EH1"), ("i", "IH1"), ("o", "AA1"), ("u", "AH1"),
    ("ee", "IY1"), ("oo", "UW1"), ("ay", "EY1"), ("oa", "OW1"),
]
CODAS = [
    ("b", "B"), ("d", "D"), ("g", "G"), ("k", "K"), ("l", "L"),
    ("m", "M"), ("n", "N"), ("p", "P"), ("t", "T"), ("sh", "SH"),
    ("ng", "NG"), ("st", "S T"),
]

FILLER_COUNT = 900


def build() -> str:
    entries: dict[str, str] = {}
    for line in CORE.strip().splitlines():
        word, _, phones = line.partition(" ")
        entries[word] = phones

    made = 0
    for o_sp, o_ph in ONSETS:
        for c_sp, c_ph in CODAS:
            for n_sp, n_ph in NUCLEI:
                if made >= FILLER_COUNT:
                    break
                word = o_sp + n_sp + c_sp
                if word in entries:
                    continue
                entries[word] = f"{o_ph} {n_ph} {c_ph}"
                made += 1

    lines = [f"{w} {entries[w]}" for w in sorted(entries)]
    header = [
        ";;; liptrain test pronunciation dictionary",
        ";;; format: WORD PH1 PH2 ...  (ARPABET, optional stress digits)",
        ";;; regenerate with tools/gen_test_dict.py -- do not edit by hand",
    ]
    return "\n".join(header + lines) + "\n"


if __name__ == "__main__":
    OUT.write_text(build(), encoding="utf-8")
    n = sum(1 for ln in OUT.read_text().splitlines() if ln and not ln.startswith(";;;"))
    print(f"wrote {OUT} ({n} entries)")
