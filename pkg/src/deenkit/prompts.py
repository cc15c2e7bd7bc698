"""Prompt templates sent to the text provider.

Templates use a literal ``{question}``-style placeholder substituted with
``str.replace`` (the router template contains JSON braces). ``kind_of`` maps a
rendered prompt back to its template so stub and scripted providers can answer
by kind.
"""

from __future__ import annotations

ROUTER = """You are an expert **Islamic question classifier**.

Analyze the user's question and classify it into **ONE** of these categories:

1. **fiqh_ruling**: Questions asking for Islamic legal rulings, permissibility, obligations, or jurisprudence
   Examples: "Is X halal?", "What's the ruling on Y?",
   هل هذا حلال؟, ما حكم كذا؟

2. **quran_retrieval**: Questions asking for specific Quranic verses or ayahs
   Examples: "What does verse 2:255 say?", "Find ayah about patience",
   ما هي الآية رقم 255 من سورة البقرة؟, اكتب الآية 275 من سورة البقرة

3. **general_islamic**: General questions about Islamic knowledge, history, concepts, or practices

   Examples: "Who was Umar ibn al-Khattab?", "What is tawakkul?", ما معنى الإحسان؟

4. **greeting**: Simple greetings, thanks, or pleasantries
   Examples: "Hi", "Thanks!", السلام عليكم, جزاك الله خيرًا

5. **zakat_calculation**: Requests to compute Zakat owed based on assets, debts, or metal prices
   Examples: "How much zakat do I pay on $10,000?", زكاة المال كم؟

6. **inheritance_calculation**: Requests to divide an estate among heirs (Mirath/Faraid)
   Examples: "Split inheritance among wife and children", قسمة الميراث بين الورثة

7. **dua_lookup**: Requests for duas (supplications) or adhkar (remembrances), or what to say in specific situations
   Examples: "dua for entering bathroom", "morning adhkar", "what to say before sleeping",
   دعاء دخول الحمام

8. **islamic_calendar**: Questions about Hijri/Islamic dates, date conversions, or Islamic events/holidays
   Examples: "What is today's Hijri date?", "When is Ramadan 2025?", "Convert March 1 to Hijri", "When is Eid?",
   ما هو التاريخ الهجري اليوم؟, متى رمضان؟

9. **prayer_times**: Questions about prayer times, salah timing, or Qibla direction for a location
   Examples: "What time is Fajr in Dubai?", "Prayer times for London", "Which direction is Qibla from Tokyo?",
   أوقات الصلاة في الرياض, اتجاه القبلة

Return ONLY valid JSON in this format (no markdown, no explanation):
{
  "question_type": "fiqh_ruling",
  "language": "en",
  "confidence": 0.95,
  "reasoning": "Brief explanation",
  "subquestions": ["question1"],
  "requires_retrieval": true
}

Classify the question below:

Question: {question}"""

QURAN_SUBTYPE = """You are an expert at classifying **Quran-related questions**.

Classify the user's Quran question into **ONE** of these sub-types:

1. **specific_verse**: Asking for a specific verse by number or reference
   Examples:
   - "What does verse 2:255 say?"
   - "Show me ayah 7 of Al-Fatiha"
   - اكتب الآية 275 من سورة البقرة
   - ما هي آخر ثلاث آيات من سورة البقرة؟
   - "What are the last three verses of Surah Al-Baqarah?"

2. **full_surah**: Asking for an entire surah's text
   Examples:
   - "Write Surah Al-Fatiha"
   - اكتب سورة الإخلاص
   - "Give me the entire Surah Nas"

3. **statistics**: Counting verses, surah metadata, or structural queries
   Examples:
   - "How many verses in Surah Al-Baqarah?"
   - كم عدد الآيات في سورة الكهف؟
   - "Which surah has the most verses?"
   - "Is Al-Baqarah Makki or Madani?"
   - كم عدد آيات سورة الفاتحة؟

4. **interpretation**: Asking for meaning, tafsir, or explanation
   Examples:
   - "What is the meaning of Ayat al-Kursi?"
   - ما معنى آخر آيات سورة البقرة؟
   - "Explain the interpretation of Al-Kawthar"
   - "What does the Quran say about patience?"

Return ONLY the sub-type name (specific_verse, full_surah, statistics, or interpretation).

Question: {question}

Sub-type:"""

QURAN_SUBTYPE_EXAMPLES = {
    "specific_verse": [
        "What does verse 2:255 say?",
        "Show me ayah 7 of Al-Fatiha",
        "اكتب الآية 275 من سورة البقرة",
        "ما هي آخر ثلاث آيات من سورة البقرة؟",
        "What are the last three verses of Surah Al-Baqarah?",
    ],
    "full_surah": ["Write Surah Al-Fatiha", "اكتب سورة الإخلاص", "Give me the entire Surah Nas"],
    "statistics": [
        "How many verses in Surah Al-Baqarah?",
        "كم عدد الآيات في سورة الكهف؟",
        "Which surah has the most verses?",
        "Is Al-Baqarah Makki or Madani?",
        "كم عدد آيات سورة الفاتحة؟",
    ],
    "interpretation": [
        "What is the meaning of Ayat al-Kursi?",
        "ما معنى آخر آيات سورة البقرة؟",
        "Explain the interpretation of Al-Kawthar",
        "What does the Quran say about patience?",
    ],
}

DUA_SYSTEM_AR = """أنت مساعد متخصص في تحديد المناسبات المناسبة للأدعية الإسلامية.
مهمتك: حدد أرقام المناسبات التي تتوافق فعلاً مع سؤال المستخدم.
أجب فقط بالأرقام مفصولة بفواصل (مثال: 1,3)
إذا لم تجد أي مناسبة مطابقة، أجب بـ "none"."""

DUA_USER_AR = """سؤال المستخدم: {question}

المناسبات المرشحة:
{occasions_list}

ما هي أرقام المناسبات المطابقة لسؤال المستخدم؟"""

DUA_SYSTEM_EN = """You are a specialist in matching Islamic dua occasions to user queries.
Your task: Identify which occasion numbers actually match the user's question.
Respond ONLY with comma-separated numbers (e.g., 1,3)
If no occasions match, respond with "none"."""

DUA_USER_EN = """User's question: {question}

Candidate occasions:
{occasions_list}

Which occasion numbers match the user's question?"""

GREETING = """You reply to greetings and pleasantries for an Islamic knowledge assistant.
Reply in one or two sentences. For Arabic, use formal Modern Standard Arabic. For English,
include a transliterated Arabic greeting and then offer to help with Islamic questions.
Language: {language}

Question: {question}"""

FIQH_ANSWER = """You answer Islamic jurisprudence questions using ONLY the evidence below.
ANSWER_KIND: fiqh
State the scope of the ruling and any assumptions first. Keep the ruling separate from the
evidence. Cite evidence with its tag exactly as given, e.g. [CITE:1]; cite verses with [Q1].
Never cite a tag that is not listed. If the evidence is insufficient, say so.

Evidence:
{evidence}

Question: {question}"""

GENERAL_ANSWER = """You answer general Islamic knowledge questions strictly from the references below.
ANSWER_KIND: general
Cite each reference you use with its tag exactly as given, e.g. [CITE:1]; cite verses with [Q1].
Do not add facts that are not in the references.

References:
{evidence}

Question: {question}"""

LOCATION = """Extract the city named in the question and give its common English name.
Respond with the city name only, or "none" if no city is mentioned.

Question: {question}"""

ZAKAT_EXTRACT = """Extract zakat inputs from the question as JSON with keys cash, gold_grams,
silver_grams, business, stocks, liabilities, gold_price, silver_price, currency (numbers or null).
Respond with JSON only, or "none" if the question has no amounts.

Question: {question}"""

ESTATE_EXTRACT = """Extract the heirs and estate value from the question as JSON:
{"heirs": [{"kind": "...", "count": 1}], "net_estate": number or null}.
Allowed kinds: husband, wife, son, daughter, father, mother, paternal_grandfather, grandmother,
sons_son, sons_daughter, full_brother, full_sister, paternal_brother, paternal_sister,
uterine_sibling. Respond with JSON only, or "none".

Question: {question}"""

NL2SQL = """Translate the Quran question into a single read-only SQLite SELECT statement.
Schema: Quran(ID INTEGER PRIMARY KEY, Surah INTEGER, Ayah INTEGER, AyahText TEXT,
SimpleText TEXT, Translation TEXT, Juz INTEGER, Revelation TEXT)  -- Revelation is 'Meccan' or 'Medinan'
Use only the Quran table. Respond with the SQL statement only.

Question: {question}"""

_KINDS = {
    "router": ROUTER.splitlines()[0],
    "quran_subtype": QURAN_SUBTYPE.splitlines()[0],
    "dua_selector": DUA_SYSTEM_EN.splitlines()[0],
    "dua_selector_ar": DUA_SYSTEM_AR.splitlines()[0],
    "greeting": GREETING.splitlines()[0],
    "answer_fiqh": FIQH_ANSWER.splitlines()[0],
    "answer_general": GENERAL_ANSWER.splitlines()[0],
    "location": LOCATION.splitlines()[0],
    "extract_zakat": ZAKAT_EXTRACT.splitlines()[0],
    "extract_estate": ESTATE_EXTRACT.splitlines()[0],
    "nl2sql": NL2SQL.splitlines()[0],
}

# prompt kind -> stub handler name
_HANDLERS = {
    "router": "router",
    "quran_subtype": "quran_subtype",
    "dua_selector": "dua_selector",
    "dua_selector_ar": "dua_selector",
    "greeting": "greeting",
    "answer_fiqh": "answer",
    "answer_general": "answer",
    "location": "location",
    "extract_zakat": "extract",
    "extract_estate": "extract",
}


def kind_of(prompt: str) -> str:
    """Prompt kind for a rendered prompt, or ``"unknown"``."""
    first = prompt.lstrip().split("\n", 1)[0]
    for kind, head in _KINDS.items():
        if first == head:
            return kind
    return "unknown"


def handler_of(kind: str) -> str:
    return _HANDLERS.get(kind, kind)


def render(template: str, **values: str) -> str:
    out = template
    for key, value in values.items():
        out = out.replace("{" + key + "}", value)
    return out


def dua_prompt(question: str, occasions: list[str], lang: str) -> str:
    listing = "\n".join(f"{i}. {occ}" for i, occ in enumerate(occasions, 1))
    if lang == "ar":
        system, user = DUA_SYSTEM_AR, DUA_USER_AR
    else:
        system, user = DUA_SYSTEM_EN, DUA_USER_EN
    return system + "\n\n" + render(user, question=question, occasions_list=listing)
